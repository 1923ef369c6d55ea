#include "seqbench/eval/auroc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "seqbench/error.hpp"

namespace seqbench::eval {

double auroc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auroc: scores and labels differ in length");
  double n_pos = 0.0, n_neg = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) {
      n_pos += 1.0;
    } else if (labels[i] == 0.0) {
      n_neg += 1.0;
    } else {
      throw ValidationError("auroc: labels must be 0 or 1");
    }
    if (std::isnan(scores[i])) throw ValidationError("auroc: NaN score");
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw ValidationError("auroc: undefined without both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks (1-based) summed over the positives give the Mann-Whitney U.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double positives = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      positives += labels[order[j]];
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += positives * midrank;
    i = j;
  }
  const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

}  // namespace seqbench::eval

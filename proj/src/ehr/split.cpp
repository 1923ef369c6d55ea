#include "seqbench/ehr/split.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "seqbench/cli/log.hpp"
#include "seqbench/error.hpp"
#include "seqbench/numerics/rng.hpp"

namespace seqbench::ehr {

SplitRatios SplitRatios::parse(std::string_view text) {
  std::array<double, 3> parts{};
  std::size_t n = 0;
  std::string token;
  std::istringstream in{std::string(text)};
  while (std::getline(in, token, ':')) {
    if (n == 3) throw ValidationError("ratios need exactly three parts: '" + std::string(text) + "'");
    try {
      std::size_t used = 0;
      parts[n] = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ValidationError("bad ratio component '" + token + "'");
    }
    if (!(parts[n] >= 0.0)) throw ValidationError("ratios must be nonnegative");
    ++n;
  }
  if (n != 3) throw ValidationError("ratios need exactly three parts: '" + std::string(text) + "'");
  const double total = parts[0] + parts[1] + parts[2];
  if (!(total > 0.0)) throw ValidationError("ratios must not all be zero");
  return SplitRatios{parts[0] / total, parts[1] / total, parts[2] / total};
}

namespace {

void slice_into(std::vector<std::size_t> order, const std::vector<PatientRecord>& records, const SplitRatios& r,
                CohortSplit& out) {
  const double n = static_cast<double>(order.size());
  // Small epsilon so 0.1 * 100 floors to 10, not 9.
  const auto n_valid = static_cast<std::size_t>(std::floor(n * r.valid + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * r.test + 1e-9));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const PatientRecord& rec = records[order[k]];
    if (k < n_valid) {
      out.valid.push_back(rec);
    } else if (k < n_valid + n_test) {
      out.test.push_back(rec);
    } else {
      out.train.push_back(rec);
    }
  }
}

}  // namespace

CohortSplit split_cohort(const std::vector<PatientRecord>& records, const SplitRatios& ratios, std::uint64_t seed) {
  if (records.size() < 10) throw ValidationError("split needs at least 10 records, got " + std::to_string(records.size()));
  const Rng root(seed);
  std::array<std::vector<std::size_t>, 2> by_label;
  for (std::size_t i = 0; i < records.size(); ++i) by_label[records[i].label == 1 ? 1 : 0].push_back(i);

  CohortSplit out;
  if (by_label[0].size() < 3 || by_label[1].size() < 3) {
    log::warn("label class with fewer than 3 members; falling back to an unstratified split");
    out.stratified = false;
    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Rng rng = root.derive("split-all");
    rng.shuffle(std::span<std::size_t>(all));
    slice_into(std::move(all), records, ratios, out);
    return out;
  }
  for (int label = 0; label < 2; ++label) {
    Rng rng = root.derive("split-class", static_cast<std::uint64_t>(label));
    rng.shuffle(std::span<std::size_t>(by_label[label]));
    slice_into(by_label[label], records, ratios, out);
  }
  return out;
}

}  // namespace seqbench::ehr

#include "seqbench/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "seqbench/error.hpp"

namespace seqbench {

GradCheckResult finite_diff_check(const DifferentiableFn& f, const Tensor& point, double h) {
  std::vector<double> analytic(point.numel(), 0.0);
  f(point, &analytic);
  if (analytic.size() != point.numel()) throw DimensionError("finite_diff_check: gradient length mismatch");

  GradCheckResult result;
  Tensor probe = point;
  probe.drop_grad();
  for (std::size_t i = 0; i < probe.numel(); ++i) {
    const double original = probe[i];
    probe[i] = original + h;
    const double up = f(probe, nullptr);
    probe[i] = original - h;
    const double down = f(probe, nullptr);
    probe[i] = original;

    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (i == 0 || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_index = i;
      result.analytic_at_worst = analytic[i];
      result.numeric_at_worst = numeric;
    }
  }
  return result;
}

}  // namespace seqbench

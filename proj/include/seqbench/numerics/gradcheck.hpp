#pragma once

#include <functional>

#include "seqbench/numerics/tensor.hpp"

namespace seqbench {

/// Scalar function of a tensor. When `grad` is non-null the function also
/// writes its analytic gradient there (same length as the point).
using DifferentiableFn = std::function<double(const Tensor& point, std::vector<double>* grad)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

/// Compares the analytic gradient of f with central differences
/// (f(x+h) - f(x-h)) / 2h coordinate by coordinate. The relative error uses
/// max(|analytic|, |numeric|, 1e-8) as denominator.
GradCheckResult finite_diff_check(const DifferentiableFn& f, const Tensor& point, double h = 1e-4);

}  // namespace seqbench

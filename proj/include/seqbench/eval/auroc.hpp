#pragma once

#include <span>

namespace seqbench::eval {

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Sort-and-rank, O(n log n). Labels must be 0/1 with both
/// classes present; otherwise ValidationError.
double auroc(std::span<const double> scores, std::span<const double> labels);

}  // namespace seqbench::eval

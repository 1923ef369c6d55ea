#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "seqbench/numerics/rng.hpp"

namespace seqbench::hpo {

/// Maximization-form expected improvement over `best` with margin xi.
/// sigma == 0 collapses to max(mu - best - xi, 0).
double expected_improvement(double mu, double sigma, double best, double xi = 0.01);

struct Observation {
  std::vector<double> x;  // unit-cube point
  double y = 0.0;
};

struct GpOptions {
  double length_scale = 0.2;
  double jitter = 1e-6;
  double min_signal_variance = 1e-4;
};

/// Matern-5/2 Gaussian process with a constant mean equal to the sample mean
/// and signal variance equal to the (population) sample variance, floored.
/// The jitter is escalated tenfold up to four times if the kernel matrix is
/// not numerically positive definite.
class GaussianProcess {
 public:
  static GaussianProcess fit(std::span<const Observation> data, const GpOptions& options = {});

  /// Posterior mean and standard deviation at x.
  std::pair<double, double> predict(std::span<const double> x) const;

  double prior_mean() const { return mean_; }
  double prior_variance() const { return signal_variance_; }
  double jitter() const { return jitter_; }

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const;

  GpOptions options_;
  std::vector<std::vector<double>> xs_;
  std::vector<double> chol_;   // lower-triangular factor, row-major n x n
  std::vector<double> alpha_;  // K^-1 (y - mean)
  double mean_ = 0.0;
  double signal_variance_ = 0.0;
  double jitter_ = 0.0;
};

inline constexpr std::size_t kWarmupTrials = 10;
inline constexpr std::size_t kAcquisitionCandidates = 1000;

/// Candidate with the largest acquisition value, the earliest on ties.
std::vector<double> best_candidate(const std::vector<std::vector<double>>& candidates,
                                   const std::function<double(std::span<const double>)>& acquisition);

/// Next unit-cube point: uniform while fewer than kWarmupTrials observations
/// exist, otherwise the argmax of EI over kAcquisitionCandidates uniform
/// candidates (ties go to the lowest candidate index).
std::vector<double> suggest_next(std::span<const Observation> observations, std::size_t dims, Rng& rng);

}  // namespace seqbench::hpo

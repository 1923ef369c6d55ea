#include "seqbench/hpo/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "seqbench/error.hpp"

namespace seqbench::hpo {

double expected_improvement(double mu, double sigma, double best, double xi) {
  if (sigma < 0.0) throw ValidationError("expected_improvement: negative sigma");
  const double gain = mu - best - xi;
  if (sigma == 0.0) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(gain * cdf + sigma * pdf, 0.0);
}

namespace {

// In-place Cholesky of a row-major SPD matrix; false if not positive definite.
bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    const double l = std::sqrt(d);
    a[j * n + j] = l;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / l;
    }
    for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
  }
  return true;
}

void forward_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
}

void backward_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
    b[i] = s / l[i * n + i];
  }
}

}  // namespace

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  const double r = std::sqrt(5.0 * sq) / options_.length_scale;
  return signal_variance_ * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

GaussianProcess GaussianProcess::fit(std::span<const Observation> data, const GpOptions& options) {
  if (data.empty()) throw ValidationError("GP fit needs at least one observation");
  GaussianProcess gp;
  gp.options_ = options;
  const std::size_t n = data.size();
  double mean = 0.0;
  for (const auto& o : data) mean += o.y;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& o : data) var += (o.y - mean) * (o.y - mean);
  var /= static_cast<double>(n);
  gp.mean_ = mean;
  gp.signal_variance_ = std::max(var, options.min_signal_variance);
  for (const auto& o : data) gp.xs_.push_back(o.x);

  std::vector<double> base(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) base[i * n + j] = gp.kernel(gp.xs_[i], gp.xs_[j]);
  }
  double jitter = options.jitter;
  for (int attempt = 0; attempt < 5; ++attempt, jitter *= 10.0) {
    std::vector<double> k = base;
    for (std::size_t i = 0; i < n; ++i) k[i * n + i] += jitter;
    if (cholesky(k, n)) {
      gp.chol_ = std::move(k);
      gp.jitter_ = jitter;
      gp.alpha_.resize(n);
      for (std::size_t i = 0; i < n; ++i) gp.alpha_[i] = data[i].y - mean;
      forward_solve(gp.chol_, n, gp.alpha_);
      backward_solve(gp.chol_, n, gp.alpha_);
      return gp;
    }
  }
  throw NumericError("GP fit: kernel matrix singular after jitter escalation");
}

std::pair<double, double> GaussianProcess::predict(std::span<const double> x) const {
  const std::size_t n = xs_.size();
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = kernel(x, xs_[i]);
  double mu = mean_;
  for (std::size_t i = 0; i < n; ++i) mu += k[i] * alpha_[i];
  forward_solve(chol_, n, k);
  double var = signal_variance_;
  for (double v : k) var -= v * v;
  return {mu, std::sqrt(std::max(var, 0.0))};
}

std::vector<double> best_candidate(const std::vector<std::vector<double>>& candidates,
                                   const std::function<double(std::span<const double>)>& acquisition) {
  if (candidates.empty()) throw ValidationError("no acquisition candidates");
  std::size_t chosen = 0;
  double chosen_value = acquisition(candidates[0]);
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double v = acquisition(candidates[c]);
    if (v > chosen_value) {
      chosen_value = v;
      chosen = c;
    }
  }
  return candidates[chosen];
}

std::vector<double> suggest_next(std::span<const Observation> observations, std::size_t dims, Rng& rng) {
  auto uniform_point = [&] {
    std::vector<double> p(dims);
    for (double& v : p) v = rng.uniform();
    return p;
  };
  if (observations.size() < kWarmupTrials) return uniform_point();

  const GaussianProcess gp = GaussianProcess::fit(observations);
  double best = observations.front().y;
  for (const auto& o : observations) best = std::max(best, o.y);

  std::vector<std::vector<double>> candidates(kAcquisitionCandidates);
  for (auto& c : candidates) c = uniform_point();
  return best_candidate(candidates, [&](std::span<const double> p) {
    const auto [mu, sigma] = gp.predict(p);
    return expected_improvement(mu, sigma, best);
  });
}

}  // namespace seqbench::hpo

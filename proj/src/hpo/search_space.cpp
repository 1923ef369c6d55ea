#include "seqbench/hpo/search_space.hpp"

#include <algorithm>
#include <cmath>

#include "seqbench/error.hpp"

namespace seqbench::hpo {

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  for (const auto& d : dims_) {
    if (!(d.lower < d.upper)) throw ValidationError("search space: lower >= upper for '" + d.name + "'");
    if (d.log_scale && !(d.lower > 0.0)) throw ValidationError("search space: log dimension '" + d.name + "' must be positive");
  }
}

SearchSpace SearchSpace::defaults() {
  return SearchSpace({{"embed_dim", 8, 256, true, true},
                      {"hidden_size", 8, 512, true, true},
                      {"lr", 1e-5, 1e-1, true, false},
                      {"weight_decay", 1e-8, 1e-2, true, false},
                      {"eps", 1e-10, 1e-4, true, false}});
}

std::map<std::string, double> SearchSpace::decode(std::span<const double> unit) const {
  if (unit.size() != dims_.size()) throw ValidationError("search space: point has the wrong dimension");
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    const double u = std::clamp(unit[i], 0.0, 1.0);
    double v = d.log_scale ? std::exp(std::log(d.lower) + u * (std::log(d.upper) - std::log(d.lower)))
                           : d.lower + u * (d.upper - d.lower);
    v = std::clamp(v, d.lower, d.upper);
    if (d.integer) v = std::clamp(std::round(v), std::ceil(d.lower), std::floor(d.upper));
    out[d.name] = v;
  }
  return out;
}

std::vector<double> SearchSpace::encode(const std::map<std::string, double>& values) const {
  std::vector<double> out;
  for (const auto& d : dims_) {
    auto it = values.find(d.name);
    if (it == values.end()) throw ValidationError("search space: missing value for '" + d.name + "'");
    const double v = std::clamp(it->second, d.lower, d.upper);
    out.push_back(d.log_scale ? (std::log(v) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower))
                              : (v - d.lower) / (d.upper - d.lower));
  }
  return out;
}

}  // namespace seqbench::hpo

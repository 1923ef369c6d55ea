#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace seqbench::hpo {

struct Dimension {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool log_scale = false;
  bool integer = false;
};

/// Box of hyperparameters mapped to the unit cube. Log-scaled dimensions are
/// uniform in log space; integer dimensions round after unwarping.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<Dimension> dims);

  /// embed_dim [8,256], hidden_size [8,512] (log2), lr [1e-5,1e-1],
  /// weight_decay [1e-8,1e-2], eps [1e-10,1e-4] (log).
  static SearchSpace defaults();

  std::size_t size() const { return dims_.size(); }
  const std::vector<Dimension>& dimensions() const { return dims_; }

  std::map<std::string, double> decode(std::span<const double> unit) const;
  std::vector<double> encode(const std::map<std::string, double>& values) const;

 private:
  std::vector<Dimension> dims_;
};

}  // namespace seqbench::hpo

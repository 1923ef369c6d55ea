#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "seqbench/hpo/search_space.hpp"
#include "seqbench/models/model_spec.hpp"
#include "seqbench/optim/optimizer.hpp"
#include "seqbench/optim/trainer.hpp"

namespace seqbench::cli {

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// skipped; keys may appear once.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::size_t> get_size(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Everything `train` needs besides data.
///
///   arch, embed_dim, hidden_size, num_layers, qrnn_filter_width
///   optimizer, lr, weight_decay, eps, beta1, beta2, rho, momentum
///   max_epochs, batch_size, patience, min_improvement, clip_norm, seed
///
/// Unset optimizer knobs take the family defaults. Unknown keys are errors.
struct TrainSettings {
  models::ModelSpec spec;
  optim::OptimizerConfig optimizer;
  optim::TrainConfig train;
  bool arch_set = false;
};

TrainSettings train_settings(const KeyValueConfig& config);

/// Settings for `hpo` and `bench`: the training keys max_epochs, batch_size,
/// patience, min_improvement and clip_norm, plus `space.<dimension> = lo:hi`
/// to narrow a search dimension.
struct StudySettings {
  optim::TrainConfig train;
  hpo::SearchSpace space = hpo::SearchSpace::defaults();
};

StudySettings study_settings(const KeyValueConfig& config);

}  // namespace seqbench::cli

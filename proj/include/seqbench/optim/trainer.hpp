#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "seqbench/ehr/types.hpp"
#include "seqbench/models/model_spec.hpp"
#include "seqbench/optim/optimizer.hpp"

namespace seqbench::optim {

struct TrainConfig {
  std::size_t max_epochs = 100;
  std::size_t batch_size = 128;
  std::size_t patience = 5;
  double min_improvement = 1e-4;
  std::uint64_t seed = 0;
  std::optional<double> clip_norm;  // global gradient-norm clip, off by default
};

void validate(const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_auroc = 0.0;
};

struct TrainResult {
  ParameterSet best_params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_valid_auroc = 0.0;
};

/// Mini-batch BCE training with a seeded per-epoch shuffle. After every epoch
/// the validation AUROC is measured and the best-scoring parameters kept.
/// Training stops after `patience` consecutive epochs that fail to beat the
/// last reference score by more than `min_improvement`, or at max_epochs.
/// Throws ValidationError if the validation set lacks a class and NumericError
/// if the loss stops being finite.
TrainResult train_model(const models::ModelSpec& spec, ParameterSet params,
                        const std::vector<ehr::PatientRecord>& train, const std::vector<ehr::PatientRecord>& valid,
                        const OptimizerConfig& opt, const TrainConfig& cfg);

/// CSV with header `epoch,train_loss,valid_auroc`.
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);
void save_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace seqbench::optim

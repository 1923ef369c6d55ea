#include "seqbench/optim/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "seqbench/cli/log.hpp"
#include "seqbench/ehr/batch.hpp"
#include "seqbench/error.hpp"
#include "seqbench/eval/auroc.hpp"
#include "seqbench/models/models.hpp"
#include "seqbench/numerics/rng.hpp"

namespace seqbench::optim {

void validate(const TrainConfig& cfg) {
  if (cfg.max_epochs == 0 || cfg.batch_size == 0 || cfg.patience == 0) {
    throw ValidationError("train config: max_epochs, batch_size and patience must be positive");
  }
  if (cfg.clip_norm && !(*cfg.clip_norm > 0.0)) throw ValidationError("train config: clip_norm must be positive");
}

namespace {

void clip_gradients(ParameterSet& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (double v : g.data()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double scale = max_norm / norm;
  for (auto& [name, g] : grads) {
    for (double& v : g.data()) v *= scale;
  }
}

double validation_auroc(const models::ModelSpec& spec, const ParameterSet& params,
                        const std::vector<ehr::PaddedBatch>& batches, const std::vector<double>& labels) {
  std::vector<double> scores;
  scores.reserve(labels.size());
  for (const auto& b : batches) {
    const auto p = models::predict_proba(spec, params, b);
    scores.insert(scores.end(), p.begin(), p.end());
  }
  return eval::auroc(scores, labels);
}

}  // namespace

TrainResult train_model(const models::ModelSpec& spec, ParameterSet params,
                        const std::vector<ehr::PatientRecord>& train, const std::vector<ehr::PatientRecord>& valid,
                        const OptimizerConfig& opt, const TrainConfig& cfg) {
  validate(cfg);
  validate(opt);
  if (train.empty() || valid.empty()) throw ValidationError("train_model: empty train or validation set");
  std::vector<double> valid_labels;
  for (const auto& r : valid) valid_labels.push_back(static_cast<double>(r.label));
  const double positives = std::accumulate(valid_labels.begin(), valid_labels.end(), 0.0);
  if (positives == 0.0 || positives == static_cast<double>(valid_labels.size())) {
    throw ValidationError("train_model: validation set has a single class; AUROC undefined");
  }
  const auto valid_batches = ehr::batch_visits(valid, cfg.batch_size);

  const Rng root(cfg.seed);
  OptimizerState state;
  TrainResult result;
  result.best_valid_auroc = -std::numeric_limits<double>::infinity();
  double reference = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;

  std::vector<const ehr::PatientRecord*> order;
  for (const auto& r : train) order.push_back(&r);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle = root.derive("shuffle", epoch);
    shuffle.shuffle(std::span<const ehr::PatientRecord*>(order));

    double loss_sum = 0.0;
    ParameterSet grads;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      const auto batch = ehr::make_batch(std::span<const ehr::PatientRecord* const>(order.data() + start, n));
      const double loss = models::loss_and_gradients(spec, params, batch, &grads);
      if (!std::isfinite(loss)) {
        throw NumericError("train_model: non-finite loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * static_cast<double>(n);
      if (cfg.clip_norm) clip_gradients(grads, *cfg.clip_norm);
      optimizer_step(params, grads, state, opt);
    }

    ParameterSet eval_params = evaluation_parameters(params, state, opt);
    const double auc = validation_auroc(spec, eval_params, valid_batches, valid_labels);
    result.history.push_back({epoch, loss_sum / static_cast<double>(order.size()), auc});

    if (auc > result.best_valid_auroc) {
      result.best_valid_auroc = auc;
      result.best_epoch = epoch;
      result.best_params = std::move(eval_params);
    }
    if (auc > reference + cfg.min_improvement) {
      reference = auc;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,train_loss,valid_auroc\n";
  char buf[96];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", h.epoch, h.train_loss, h.valid_auroc);
    out << buf;
  }
}

void save_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_history_csv(out, history);
}

}  // namespace seqbench::optim

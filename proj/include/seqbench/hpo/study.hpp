#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "seqbench/ehr/types.hpp"
#include "seqbench/hpo/search_space.hpp"
#include "seqbench/models/model_spec.hpp"
#include "seqbench/optim/optimizer.hpp"
#include "seqbench/optim/trainer.hpp"

namespace seqbench::hpo {

enum class TrialStatus { Ok, Failed };

struct Trial {
  std::string task;
  std::string arch;
  std::size_t index = 0;
  optim::Family family = optim::Family::Adam;
  std::vector<double> point;              // unit cube
  std::map<std::string, double> values;   // decoded hyperparameters
  double valid_auroc = 0.0;
  double test_auroc = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  TrialStatus status = TrialStatus::Ok;
  std::string error;
};

struct TrialOutcome {
  double valid_auroc = 0.0;
  double test_auroc = 0.0;
};

/// Evaluates one trial (its point, decoded values, family and seed are set).
using Objective = std::function<TrialOutcome(const Trial& trial)>;

struct StudyConfig {
  std::string task = "hf";
  std::string arch = "GRU";
  SearchSpace space = SearchSpace::defaults();
  std::size_t budget = 10;
  std::uint64_t root_seed = 0;
  std::size_t workers = 1;
};

/// Appends trials to a JSON Lines ledger, one line per trial, serialized.
class LedgerWriter {
 public:
  explicit LedgerWriter(std::ostream& out, bool include_timing = false) : out_(out), timing_(include_timing) {}
  void append(const Trial& trial);

 private:
  std::ostream& out_;
  bool timing_;
  std::mutex mutex_;
};

/// Budget per optimizer family: an even split in sweep order, the first
/// `budget % 7` families taking one extra trial.
std::vector<std::pair<optim::Family, std::size_t>> family_budgets(std::size_t budget);

/// Bayesian optimization within each optimizer family. Trials of a family are
/// issued in rounds of `workers`; every trial in a round sees the same ledger
/// snapshot and draws its suggestion from a stream keyed by its global trial
/// index, so the ledger is reproducible for a fixed worker count. A throwing
/// objective marks the trial failed with valid_auroc = 0. Failed trials are
/// not fed to the surrogate.
std::vector<Trial> run_study(const StudyConfig& config, const Objective& objective, LedgerWriter* ledger = nullptr);

/// Index of the trial with the highest validation AUROC among successful
/// trials, ties going to the earliest. Test AUROC is never consulted.
std::optional<std::size_t> best_trial(const std::vector<Trial>& trials);

/// Running maximum of validation AUROC over the ledger prefix.
std::vector<double> best_so_far(const std::vector<Trial>& trials);

struct DataSplits {
  std::vector<ehr::PatientRecord> train;
  std::vector<ehr::PatientRecord> valid;
  std::vector<ehr::PatientRecord> test;
  std::size_t vocab_size = 0;
};

/// Builds the model described by the trial's values, trains it with the
/// trial's family and seed, and scores the best-validation parameters on the
/// test split.
Objective training_objective(models::Architecture arch, const DataSplits& data, const optim::TrainConfig& base);

models::ModelSpec spec_from_values(models::Architecture arch, std::size_t vocab_size,
                                   const std::map<std::string, double>& values);
optim::OptimizerConfig optimizer_from_values(optim::Family family, const std::map<std::string, double>& values);

std::string trial_to_json(const Trial& trial, bool include_timing);
Trial trial_from_json(const std::string& line);
std::vector<Trial> read_ledger(std::istream& in);
std::vector<Trial> load_ledger(const std::filesystem::path& path);

}  // namespace seqbench::hpo

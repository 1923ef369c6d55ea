#include "seqbench/hpo/study.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "seqbench/cli/log.hpp"
#include "seqbench/error.hpp"
#include "seqbench/eval/auroc.hpp"
#include "seqbench/hpo/gaussian_process.hpp"
#include "seqbench/models/models.hpp"
#include "seqbench/numerics/rng.hpp"

namespace seqbench::hpo {

using nlohmann::json;

void LedgerWriter::append(const Trial& trial) {
  const std::string line = trial_to_json(trial, timing_);
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
}

std::vector<std::pair<optim::Family, std::size_t>> family_budgets(std::size_t budget) {
  const auto families = optim::all_families();
  std::vector<std::pair<optim::Family, std::size_t>> out;
  for (std::size_t i = 0; i < families.size(); ++i) {
    out.emplace_back(families[i], budget / families.size() + (i < budget % families.size() ? 1 : 0));
  }
  return out;
}

namespace {

Trial evaluate(Trial trial, const Objective& objective) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const TrialOutcome outcome = objective(trial);
    if (!std::isfinite(outcome.valid_auroc) || !std::isfinite(outcome.test_auroc)) {
      throw NumericError("objective returned a non-finite AUROC");
    }
    trial.valid_auroc = outcome.valid_auroc;
    trial.test_auroc = outcome.test_auroc;
    trial.status = TrialStatus::Ok;
  } catch (const std::exception& e) {
    trial.status = TrialStatus::Failed;
    trial.valid_auroc = 0.0;
    trial.test_auroc = 0.0;
    trial.error = e.what();
  }
  trial.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trial;
}

}  // namespace

std::vector<Trial> run_study(const StudyConfig& config, const Objective& objective, LedgerWriter* ledger) {
  if (config.budget == 0) throw ValidationError("study budget must be at least 1");
  const std::size_t workers = std::max<std::size_t>(1, config.workers);
  const Rng root(config.root_seed);
  std::vector<Trial> ledger_trials;
  std::size_t next_index = 0;

  for (const auto& [family, family_budget] : family_budgets(config.budget)) {
    std::vector<Observation> observations;
    std::size_t issued = 0;
    while (issued < family_budget) {
      const std::size_t round = std::min(workers, family_budget - issued);
      std::vector<Trial> pending(round);
      for (std::size_t k = 0; k < round; ++k) {
        Trial& t = pending[k];
        t.task = config.task;
        t.arch = config.arch;
        t.index = next_index + k;
        t.family = family;
        Rng suggest_rng = root.derive(config.arch + "/suggest", t.index);
        t.point = suggest_next(observations, config.space.size(), suggest_rng);
        t.values = config.space.decode(t.point);
        t.seed = root.derive_seed(config.arch + "/train", t.index);
      }

      std::vector<Trial> done(round);
      if (round == 1) {
        done[0] = evaluate(pending[0], objective);
      } else {
        std::vector<std::thread> threads;
        for (std::size_t k = 0; k < round; ++k) {
          threads.emplace_back([&, k] { done[k] = evaluate(pending[k], objective); });
        }
        for (auto& th : threads) th.join();
      }

      for (Trial& t : done) {
        if (t.status == TrialStatus::Ok) {
          observations.push_back({t.point, t.valid_auroc});
        } else {
          log::warn("trial " + std::to_string(t.index) + " failed: " + t.error);
        }
        log::info(config.arch + " trial " + std::to_string(t.index) + " [" + std::string(optim::family_name(family)) +
                  "] valid=" + std::to_string(t.valid_auroc) + " test=" + std::to_string(t.test_auroc));
        if (ledger) ledger->append(t);
        ledger_trials.push_back(std::move(t));
      }
      issued += round;
      next_index += round;
    }
  }
  return ledger_trials;
}

std::optional<std::size_t> best_trial(const std::vector<Trial>& trials) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].status != TrialStatus::Ok) continue;
    if (!best || trials[i].valid_auroc > trials[*best].valid_auroc) best = i;
  }
  return best;
}

std::vector<double> best_so_far(const std::vector<Trial>& trials) {
  std::vector<double> out;
  double best = 0.0;
  for (const auto& t : trials) {
    if (t.status == TrialStatus::Ok) best = std::max(best, t.valid_auroc);
    out.push_back(best);
  }
  return out;
}

models::ModelSpec spec_from_values(models::Architecture arch, std::size_t vocab_size,
                                   const std::map<std::string, double>& values) {
  models::ModelSpec spec;
  spec.arch = arch;
  spec.vocab_size = vocab_size;
  if (auto it = values.find("embed_dim"); it != values.end()) spec.embed_dim = static_cast<std::size_t>(it->second);
  if (auto it = values.find("hidden_size"); it != values.end()) spec.hidden_size = static_cast<std::size_t>(it->second);
  return spec;
}

optim::OptimizerConfig optimizer_from_values(optim::Family family, const std::map<std::string, double>& values) {
  optim::OptimizerConfig cfg = optim::OptimizerConfig::defaults(family);
  if (auto it = values.find("lr"); it != values.end()) cfg.lr = it->second;
  if (auto it = values.find("weight_decay"); it != values.end()) cfg.weight_decay = it->second;
  if (auto it = values.find("eps"); it != values.end()) cfg.eps = it->second;
  return cfg;
}

Objective training_objective(models::Architecture arch, const DataSplits& data, const optim::TrainConfig& base) {
  return [arch, &data, base](const Trial& trial) {
    const models::ModelSpec spec = spec_from_values(arch, data.vocab_size, trial.values);
    const Rng seeds(trial.seed);
    optim::TrainConfig cfg = base;
    cfg.seed = seeds.derive_seed("train");
    const auto result = optim::train_model(spec, models::init_parameters(spec, seeds.derive_seed("init")), data.train,
                                           data.valid, optimizer_from_values(trial.family, trial.values), cfg);
    std::vector<double> labels;
    for (const auto& r : data.test) labels.push_back(static_cast<double>(r.label));
    const auto scores = models::predict_proba(spec, result.best_params, data.test);
    return TrialOutcome{result.best_valid_auroc, eval::auroc(scores, labels)};
  };
}

std::string trial_to_json(const Trial& t, bool include_timing) {
  json j = {{"task", t.task},
            {"arch", t.arch},
            {"trial", t.index},
            {"family", optim::family_name(t.family)},
            {"point", t.point},
            {"params", t.values},
            {"status", t.status == TrialStatus::Ok ? "ok" : "failed"},
            {"valid_auroc", t.valid_auroc},
            {"test_auroc", t.test_auroc},
            {"seed", t.seed}};
  if (!t.error.empty()) j["error"] = t.error;
  if (include_timing) j["wall_seconds"] = t.wall_seconds;
  return j.dump();
}

Trial trial_from_json(const std::string& line) {
  const json j = json::parse(line);
  Trial t;
  t.task = j.at("task").get<std::string>();
  t.arch = j.at("arch").get<std::string>();
  t.index = j.at("trial").get<std::size_t>();
  t.family = optim::parse_family(j.at("family").get<std::string>());
  t.point = j.at("point").get<std::vector<double>>();
  t.values = j.at("params").get<std::map<std::string, double>>();
  const auto status = j.at("status").get<std::string>();
  if (status != "ok" && status != "failed") throw ValidationError("unknown trial status '" + status + "'");
  t.status = status == "ok" ? TrialStatus::Ok : TrialStatus::Failed;
  t.valid_auroc = j.at("valid_auroc").get<double>();
  t.test_auroc = j.at("test_auroc").get<double>();
  t.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("error")) t.error = j.at("error").get<std::string>();
  if (j.contains("wall_seconds")) t.wall_seconds = j.at("wall_seconds").get<double>();
  return t;
}

std::vector<Trial> read_ledger(std::istream& in) {
  std::vector<Trial> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(trial_from_json(line));
    } catch (const std::exception& e) {
      throw IoError("ledger line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Trial> load_ledger(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_ledger(in);
}

}  // namespace seqbench::hpo

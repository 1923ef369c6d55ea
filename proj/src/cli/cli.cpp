#include "seqbench/cli/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seqbench/cli/config.hpp"
#include "seqbench/cli/log.hpp"
#include "seqbench/ehr/cohort_io.hpp"
#include "seqbench/ehr/generator.hpp"
#include "seqbench/ehr/readmission.hpp"
#include "seqbench/ehr/split.hpp"
#include "seqbench/error.hpp"
#include "seqbench/eval/report.hpp"
#include "seqbench/hpo/study.hpp"
#include "seqbench/models/checkpoint.hpp"
#include "seqbench/numerics/rng.hpp"

namespace seqbench::cli {

namespace {

struct Globals {
  std::uint64_t seed = 42;
  std::string out;
  std::string log = "text";
};

struct GenArgs {
  std::string task = "hf";
  std::size_t patients = 1000;
  std::optional<double> prevalence;
  std::size_t vocab = 300;
};

struct LabelArgs {
  std::string in;
};

struct SplitArgs {
  std::string in;
  std::string ratios = "7:1:2";
  std::string out_prefix;
};

struct TrainArgs {
  std::string arch;
  std::string config;
  std::string train;
  std::string valid;
};

struct StudyArgs {
  std::string arch;
  std::string archs = "all";
  std::string task = "hf";
  std::size_t budget = 10;
  std::size_t workers = 1;
  std::string data_prefix;
  std::string config;
  std::string ledger;
  bool timing = false;
};

struct ReportArgs {
  std::vector<std::string> ledgers;
  std::string table;
};

void require_out(const Globals& g, const std::string& command) {
  if (g.out.empty()) throw CLI::RequiredError(command + " requires --out");
}

hpo::DataSplits load_splits(const std::string& prefix) {
  hpo::DataSplits data;
  const ehr::Cohort train = ehr::load_cohort(prefix + ".train.jsonl");
  const ehr::Cohort valid = ehr::load_cohort(prefix + ".valid.jsonl");
  const ehr::Cohort test = ehr::load_cohort(prefix + ".test.jsonl");
  data.vocab_size = std::max({train.vocab.size(), valid.vocab.size(), test.vocab.size()});
  data.train = train.records;
  data.valid = valid.records;
  data.test = test.records;
  return data;
}

StudySettings load_study_settings(const StudyArgs& a) {
  if (a.config.empty()) return {};
  return study_settings(KeyValueConfig::load(a.config));
}

std::vector<hpo::Trial> study_one(const std::string& arch_name, const hpo::DataSplits& data, const StudyArgs& a,
                                  const Globals& g, hpo::LedgerWriter& ledger) {
  const models::Architecture arch = models::parse_architecture(arch_name);
  hpo::StudyConfig cfg;
  cfg.task = std::string(ehr::task_name(ehr::parse_task(a.task)));
  cfg.arch = std::string(models::architecture_name(arch));
  cfg.budget = a.budget;
  cfg.root_seed = g.seed;
  cfg.workers = a.workers;
  const StudySettings settings = load_study_settings(a);
  cfg.space = settings.space;
  const auto objective = hpo::training_objective(arch, data, settings.train);
  return hpo::run_study(cfg, objective, &ledger);
}

void cmd_gen(const GenArgs& a, const Globals& g) {
  require_out(g, "gen");
  ehr::GeneratorSpec spec = ehr::GeneratorSpec::for_task(ehr::parse_task(a.task));
  spec.n_patients = a.patients;
  spec.vocab_size = a.vocab;
  spec.seed = g.seed;
  if (a.prevalence) spec.target_prevalence = *a.prevalence;
  const auto generated = ehr::generate_cohort(spec);
  ehr::save_cohort(g.out, generated.cohort);
  log::info("wrote " + std::to_string(generated.cohort.records.size()) + " patients to " + g.out);
}

void cmd_label(const LabelArgs& a, const Globals& g) {
  require_out(g, "label");
  const auto encounters = ehr::load_encounters(a.in);
  const auto outcomes = ehr::build_readmission_labels(encounters);
  ehr::Cohort cohort;
  cohort.records = ehr::readmission_records(encounters, outcomes, cohort.vocab);
  ehr::save_cohort(g.out, cohort);
  log::info("labeled " + std::to_string(cohort.records.size()) + " of " + std::to_string(outcomes.size()) +
            " patients into " + g.out);
}

void cmd_split(const SplitArgs& a, const Globals& g) {
  const ehr::Cohort cohort = ehr::load_cohort(a.in);
  const auto split = ehr::split_cohort(cohort.records, ehr::SplitRatios::parse(a.ratios), g.seed);
  const std::pair<const char*, const std::vector<ehr::PatientRecord>*> parts[] = {
      {"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}};
  for (const auto& [name, records] : parts) {
    const std::string path = a.out_prefix + "." + name + ".jsonl";
    ehr::save_cohort(path, ehr::Cohort{*records, cohort.vocab});
    log::info("wrote " + std::to_string(records->size()) + " patients to " + path);
  }
}

void cmd_train(const TrainArgs& a, const Globals& g) {
  require_out(g, "train");
  TrainSettings s = a.config.empty() ? TrainSettings{} : train_settings(KeyValueConfig::load(a.config));
  if (!a.config.empty() && !KeyValueConfig::load(a.config).has("seed")) s.train.seed = g.seed;
  if (a.config.empty()) s.train.seed = g.seed;
  if (!a.arch.empty()) {
    s.spec.arch = models::parse_architecture(a.arch);
  } else if (!s.arch_set) {
    throw ValidationError("no architecture given (--arch or config key 'arch')");
  }
  const ehr::Cohort train = ehr::load_cohort(a.train);
  const ehr::Cohort valid = ehr::load_cohort(a.valid);
  s.spec.vocab_size = std::max(train.vocab.size(), valid.vocab.size());
  models::validate(s.spec);
  const Rng seeds(s.train.seed);
  const auto result = optim::train_model(s.spec, models::init_parameters(s.spec, seeds.derive_seed("init")),
                                         train.records, valid.records, s.optimizer, s.train);
  models::save_checkpoint(g.out, {s.spec, result.best_params});
  optim::save_history_csv(g.out + ".history.csv", result.history);
  log::info("best valid AUROC " + std::to_string(result.best_valid_auroc) + " at epoch " +
            std::to_string(result.best_epoch));
}

void cmd_hpo(const StudyArgs& a, const Globals& g) {
  require_out(g, "hpo");
  if (a.arch.empty()) throw CLI::RequiredError("hpo requires --arch");
  const auto data = load_splits(a.data_prefix);
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw IoError("cannot write " + g.out);
  hpo::LedgerWriter ledger(out, a.timing);
  const auto trials = study_one(a.arch, data, a, g, ledger);
  const auto best = hpo::best_trial(trials);
  if (best) log::info("best trial " + std::to_string(*best) + " valid " + std::to_string(trials[*best].valid_auroc));
}

std::vector<std::string> bench_archs(const std::string& list) {
  std::vector<std::string> out;
  if (list == "all") {
    for (const auto& name : eval::report_models()) {
      if (name != "RF") out.push_back(name);
    }
    return out;
  }
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.emplace_back(models::architecture_name(models::parse_architecture(item)));
  }
  if (out.empty()) throw ValidationError("--archs names no architecture");
  return out;
}

void cmd_bench(const StudyArgs& a, const Globals& g) {
  require_out(g, "bench");
  const auto archs = bench_archs(a.archs);
  const auto data = load_splits(a.data_prefix);
  const std::string ledger_path = a.ledger.empty() ? g.out + ".ledger.jsonl" : a.ledger;
  std::ofstream out(ledger_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + ledger_path);
  hpo::LedgerWriter ledger(out, a.timing);
  std::vector<hpo::Trial> all;
  for (const auto& arch : archs) {
    auto trials = study_one(arch, data, a, g, ledger);
    all.insert(all.end(), trials.begin(), trials.end());
  }
  eval::save_report_csv(g.out, eval::make_report(all));
  log::info("wrote report for " + std::to_string(archs.size()) + " architectures to " + g.out);
}

void cmd_report(const ReportArgs& a, const Globals& g) {
  if (a.ledgers.empty() == a.table.empty()) throw CLI::ValidationError("report needs exactly one of --ledgers, --table");
  eval::BenchmarkReport report;
  if (!a.table.empty()) {
    report = eval::load_report_csv(a.table);
  } else {
    std::vector<hpo::Trial> all;
    for (const auto& path : a.ledgers) {
      auto trials = hpo::load_ledger(path);
      all.insert(all.end(), trials.begin(), trials.end());
    }
    report = eval::make_report(all);
  }
  if (g.out.empty()) {
    eval::write_report_csv(std::cout, report);
  } else {
    eval::save_report_csv(g.out, report);
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Sequence-model benchmark harness for longitudinal EHR cohorts", "seqbench"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
  app.add_option("--out", g.out, "Output path");
  app.add_option("--log", g.log, "Log format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic cohort");
  gen_cmd->add_option("--task", gen.task)->check(CLI::IsMember({"hf", "readm"}))->capture_default_str();
  gen_cmd->add_option("--patients", gen.patients)->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--prevalence", gen.prevalence)->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--vocab", gen.vocab)->capture_default_str();

  LabelArgs label;
  auto* label_cmd = app.add_subcommand("label", "Label readmission cases from an encounters file");
  label_cmd->add_option("--in", label.in)->required();

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Stratified train/valid/test split");
  split_cmd->add_option("--in", split.in)->required();
  split_cmd->add_option("--ratios", split.ratios)->capture_default_str();
  split_cmd->add_option("--out-prefix", split.out_prefix)->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  train_cmd->add_option("--arch", train.arch);
  train_cmd->add_option("--config", train.config);
  train_cmd->add_option("--train", train.train)->required();
  train_cmd->add_option("--valid", train.valid)->required();

  StudyArgs study;
  auto* hpo_cmd = app.add_subcommand("hpo", "Hyperparameter search for one architecture");
  auto* bench_cmd = app.add_subcommand("bench", "Hyperparameter search for several architectures and report");
  hpo_cmd->add_option("--arch", study.arch)->required();
  bench_cmd->add_option("--archs", study.archs)->capture_default_str();
  for (auto* cmd : {hpo_cmd, bench_cmd}) {
    cmd->add_option("--budget", study.budget)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--workers", study.workers)->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--data-prefix", study.data_prefix)->required();
    cmd->add_option("--task", study.task)->check(CLI::IsMember({"hf", "readm"}))->capture_default_str();
    cmd->add_option("--config", study.config, "Training settings and search-space bounds");
    cmd->add_flag("--timing", study.timing, "Record wall_seconds in the ledger");
  }
  bench_cmd->add_option("--ledger", study.ledger, "Ledger path (default: <out>.ledger.jsonl)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render a report CSV from ledgers or a stored table");
  report_cmd->add_option("--ledgers", report.ledgers)->delimiter(',');
  report_cmd->add_option("--table", report.table);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    log::set_format(log::parse_format(g.log));
    if (gen_cmd->parsed()) cmd_gen(gen, g);
    if (label_cmd->parsed()) cmd_label(label, g);
    if (split_cmd->parsed()) cmd_split(split, g);
    if (train_cmd->parsed()) cmd_train(train, g);
    if (hpo_cmd->parsed()) cmd_hpo(study, g);
    if (bench_cmd->parsed()) cmd_bench(study, g);
    if (report_cmd->parsed()) cmd_report(report, g);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(copy.size()), argv.data());
}

}  // namespace seqbench::cli

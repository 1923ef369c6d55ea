#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>

#include "seqbench/cli/cli.hpp"
#include "seqbench/cli/log.hpp"
#include "seqbench/ehr/batch.hpp"
#include "seqbench/ehr/generator.hpp"
#include "seqbench/ehr/readmission.hpp"
#include "seqbench/ehr/split.hpp"
#include "seqbench/eval/auroc.hpp"
#include "seqbench/eval/report.hpp"
#include "seqbench/hpo/gaussian_process.hpp"
#include "seqbench/hpo/study.hpp"
#include "seqbench/models/cells.hpp"
#include "seqbench/models/models.hpp"
#include "seqbench/models/runners.hpp"
#include "seqbench/numerics/gradcheck.hpp"
#include "seqbench/optim/optimizer.hpp"

using namespace seqbench;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<ehr::PatientRecord> random_records(std::size_t n, std::size_t vocab, std::size_t max_visits, Rng& rng) {
  std::vector<ehr::PatientRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ehr::PatientRecord r{"P" + std::to_string(i), static_cast<int>(i % 2), {}};
    const std::size_t visits = 1 + rng.below(max_visits);
    for (std::size_t v = 0; v < visits; ++v) {
      ehr::Visit visit{v == 0 ? 0 : static_cast<int>(1 + rng.below(200)), {}};
      const std::size_t codes = 1 + rng.below(3);
      for (std::size_t c = 0; c < codes; ++c) visit.codes.push_back(static_cast<std::int32_t>(1 + rng.below(vocab - 1)));
      r.visits.push_back(std::move(visit));
    }
    out.push_back(std::move(r));
  }
  return out;
}

models::ModelSpec small_spec(models::Architecture arch) {
  models::ModelSpec s;
  s.arch = arch;
  s.vocab_size = 20;
  s.embed_dim = 4;
  s.hidden_size = 5;
  return s;
}

const std::vector<models::Architecture>& all_architectures() {
  using models::Architecture;
  static const std::vector<Architecture> archs = {
      Architecture::GRU,   Architecture::LSTM,   Architecture::DGRU,  Architecture::DLSTM, Architecture::QRNN,
      Architecture::RETAIN, Architecture::LR,    Architecture::BiGRU, Architecture::BiLSTM, Architecture::BiRNN,
      Architecture::DRNN,  Architecture::RNN,    Architecture::TLSTM};
  return archs;
}

Outcome gradient_suite() {
  const auto start = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  std::string worst_arch;
  for (auto arch : all_architectures()) {
    const auto spec = small_spec(arch);
    auto records = random_records(3, 20, 6, rng);
    records[0].visits.resize(6, ehr::Visit{7, {2, 11}});
    const auto batch = ehr::make_batch(records);
    const auto params = models::init_parameters(spec, 99);
    std::vector<std::string> names;
    for (const auto& [name, t] : params) names.push_back(name);
    auto flatten = [&](const models::ParameterSet& p) {
      std::vector<double> flat;
      for (const auto& n : names) flat.insert(flat.end(), p.at(n).storage().begin(), p.at(n).storage().end());
      return flat;
    };
    auto f = [&](const Tensor& point, std::vector<double>* grad) {
      models::ParameterSet p = params;
      std::size_t k = 0;
      for (const auto& n : names) {
        for (auto& v : p.at(n).storage()) v = point[k++];
      }
      models::ParameterSet g;
      const double loss = models::loss_and_gradients(spec, p, batch, grad ? &g : nullptr);
      if (grad) *grad = flatten(g);
      return loss;
    };
    const auto flat = flatten(params);
    const auto r = finite_diff_check(f, Tensor({flat.size()}, flat));
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_arch = std::string(models::architecture_name(arch));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-4 && elapsed < 120.0,
          "13 models, worst rel err " + fmt("%.2e", worst) + " (" + worst_arch + "), " + fmt("%.1f", elapsed) + " s"};
}

Outcome reduction_identities() {
  Rng rng(7);
  std::size_t dilated_mismatch = 0;
  double tlstm_gap = 0.0, alpha_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto records = random_records(1 + rng.below(4), 20, 8, rng);
    const auto batch = ehr::make_batch(records);
    const auto cell_kind = trial % 3 == 0 ? models::CellKind::RNN
                                          : (trial % 3 == 1 ? models::CellKind::GRU : models::CellKind::LSTM);
    const auto arch = cell_kind == models::CellKind::RNN
                          ? models::Architecture::RNN
                          : (cell_kind == models::CellKind::GRU ? models::Architecture::GRU : models::Architecture::LSTM);
    const auto params = models::init_parameters(small_spec(arch), trial);
    ad::Graph g;
    models::BoundParameters bp(g, params, false);
    const auto in = models::embed_visits(bp["embedding"], batch);
    const auto cell = models::bind_cell(bp, "cell.", cell_kind);
    const std::vector<models::CellParams> layers{cell};
    const Tensor dilated = models::run_dilated(in, batch, layers).value();
    const Tensor standard = models::run_standard(in, batch, cell).value();
    if (dilated.storage() != standard.storage()) ++dilated_mismatch;

    auto flat = records;
    for (auto& r : flat) {
      for (auto& v : r.visits) v.delta_days = 0;
    }
    const auto flat_batch = ehr::make_batch(flat);
    const auto tparams = models::init_parameters(small_spec(models::Architecture::TLSTM), trial);
    ad::Graph tg;
    models::BoundParameters tb(tg, tparams, false);
    const auto tin = models::embed_visits(tb["embedding"], flat_batch);
    const auto tcell = models::bind_cell(tb, "tlstm.", models::CellKind::LSTM);
    const Tensor t = models::tlstm_forward(tin, flat_batch, tcell, tb["tlstm.W_d"], tb["tlstm.b_d"]).value();
    const Tensor l = models::run_standard(tin, flat_batch, tcell).value();
    for (std::size_t i = 0; i < t.numel(); ++i) tlstm_gap = std::max(tlstm_gap, std::abs(t[i] - l[i]));

    const auto rspec = small_spec(models::Architecture::RETAIN);
    const auto ex = models::explain_retain(rspec, models::init_parameters(rspec, trial), batch);
    for (const auto& row : ex.alpha) {
      double total = 0.0;
      for (double a : row) total += a;
      alpha_gap = std::max(alpha_gap, std::abs(total - 1.0));
    }
  }
  return {dilated_mismatch == 0 && tlstm_gap <= 1e-12 && alpha_gap <= 1e-12,
          "dilated L=1 mismatches " + std::to_string(dilated_mismatch) + "/100, T-LSTM gap " + fmt("%.1e", tlstm_gap) +
              ", alpha sum gap " + fmt("%.1e", alpha_gap)};
}

Outcome auroc_oracle() {
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(499);
    std::vector<double> s(n), y(n);
    const double levels = static_cast<double>(1 + rng.below(20));
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 == 0 ? std::floor(rng.uniform() * levels) : rng.uniform();
      y[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
    }
    y[0] = 1.0;
    y[1] = 0.0;
    double credit = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] == 1.0 && y[j] == 0.0) {
          pairs += 1.0;
          credit += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    worst = std::max(worst, std::abs(eval::auroc(s, y) - credit / pairs));
  }
  return {worst <= 1e-12, "200 instances, max |sort - pairwise| " + fmt("%.1e", worst)};
}

Outcome optimizer_fixtures() {
  using namespace optim;
  auto first = [](Family f, double w, double g, double lr) {
    OptimizerConfig cfg = OptimizerConfig::defaults(f);
    cfg.lr = lr;
    ParameterSet p{{"w", Tensor({1}, w)}};
    OptimizerState s;
    optimizer_step(p, ParameterSet{{"w", Tensor({1}, g)}}, s, cfg);
    return p.at("w")[0];
  };
  double gap = 0.0;
  gap = std::max(gap, std::abs(first(Family::SGD, 1.0, 0.5, 0.1) - 0.95));
  gap = std::max(gap, std::abs(first(Family::Adam, 0.0, 2.0, 0.1) - (-0.1 * 2.0 / (2.0 + 1e-8))));
  gap = std::max(gap, std::abs(first(Family::Adagrad, 1.0, 0.5, 0.1) - (1.0 - 0.1 * 0.5 / (0.5 + 1e-8))));
  std::size_t reduced = 0;
  for (Family f : all_families()) {
    const OptimizerConfig cfg = OptimizerConfig::defaults(f);
    ParameterSet p{{"w", Tensor({4}, 10.0)}};
    OptimizerState s;
    for (int i = 0; i < 200; ++i) {
      ParameterSet g{{"w", Tensor({4})}};
      for (std::size_t k = 0; k < 4; ++k) g.at("w")[k] = 2.0 * p.at("w")[k];
      optimizer_step(p, g, s, cfg);
    }
    const ParameterSet final_params = evaluation_parameters(p, s, cfg);
    double norm = 0.0;
    for (double v : final_params.at("w").storage()) norm += v * v;
    if (norm < 400.0) ++reduced;
  }
  return {gap <= 1e-12 && reduced == 7,
          "first-step gap " + fmt("%.1e", gap) + ", " + std::to_string(reduced) + "/7 families reduce |w|^2"};
}

Outcome bo_sanity() {
  std::size_t hits = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<hpo::Observation> obs;
    for (int i = 0; i < 30; ++i) {
      const auto u = hpo::suggest_next(obs, 1, rng);
      obs.push_back({u, -(u[0] - 0.3) * (u[0] - 0.3)});
    }
    const auto best = std::max_element(obs.begin(), obs.end(), [](auto& a, auto& b) { return a.y < b.y; });
    const double err = std::abs(best->x[0] - 0.3);
    worst = std::max(worst, err);
    if (err <= 0.05) ++hits;
  }
  const double ei = hpo::expected_improvement(0.5, 0.0, 0.5);
  return {hits == 5 && ei == 0.0,
          std::to_string(hits) + "/5 seeds within 0.05 (worst " + fmt("%.4f", worst) + "), EI(sigma=0) = " + fmt("%g", ei)};
}

Outcome planted_benchmark() {
  const auto start = Clock::now();
  ehr::GeneratorSpec gen = ehr::GeneratorSpec::for_task(ehr::Task::Readmission);
  gen.n_patients = 4000;
  gen.seed = 42;
  const auto cohort = ehr::generate_cohort(gen);
  std::vector<double> labels;
  for (const auto& r : cohort.cohort.records) labels.push_back(r.label);
  const double oracle = eval::auroc(cohort.risk, labels);

  const auto split = ehr::split_cohort(cohort.cohort.records, ehr::SplitRatios::parse("7:1:2"), 42);
  hpo::DataSplits data{split.train, split.valid, split.test, cohort.cohort.vocab.size()};
  optim::TrainConfig train;
  train.max_epochs = 30;
  train.patience = 5;
  train.batch_size = 128;
  std::vector<hpo::Dimension> dims = hpo::SearchSpace::defaults().dimensions();
  dims[0].upper = 64;
  dims[1].upper = 64;

  auto tuned = [&](models::Architecture arch) {
    hpo::StudyConfig cfg;
    cfg.task = "readm";
    cfg.arch = std::string(models::architecture_name(arch));
    cfg.space = hpo::SearchSpace(dims);
    cfg.budget = 15;
    cfg.root_seed = 42;
    const auto trials = hpo::run_study(cfg, hpo::training_objective(arch, data, train));
    return eval::select_best(trials);
  };
  const auto gru = tuned(models::Architecture::GRU);
  const auto lr = tuned(models::Architecture::LR);
  const double elapsed = seconds_since(start);
  const bool pass = oracle > 0.95 && gru.test_auroc >= 0.80 && gru.test_auroc - lr.test_auroc >= 0.05 && elapsed < 1800;
  return {pass, "oracle " + fmt("%.3f", oracle) + ", GRU test " + fmt("%.3f", gru.test_auroc) + ", LR test " +
                    fmt("%.3f", lr.test_auroc) + ", gap " + fmt("%.3f", gru.test_auroc - lr.test_auroc) + ", " +
                    fmt("%.0f", elapsed) + " s"};
}

Outcome cohort_labeling() {
  using ehr::EncounterKind;
  auto gap_status = [](int gap) {
    return ehr::build_readmission_labels({{"p", 0, 3, EncounterKind::Inpatient, {"a"}},
                                          {"p", 3 + gap, 5 + gap, EncounterKind::Inpatient, {"b"}}})[0]
        .status;
  };
  const bool windows = gap_status(29) == ehr::ReadmissionStatus::Case && gap_status(91) == ehr::ReadmissionStatus::Control &&
                       gap_status(45) == ehr::ReadmissionStatus::ExcludedMidGap;

  Rng rng(77);
  std::size_t invariant = 0;
  auto by_admit = [](const ehr::Encounter& a, const ehr::Encounter& b) { return a.admit_day < b.admit_day; };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ehr::Encounter> base;
    const std::size_t patients = 1 + rng.below(5);
    for (std::size_t p = 0; p < patients; ++p) {
      int day = static_cast<int>(rng.below(60));
      const std::size_t stays = 1 + rng.below(4);
      for (std::size_t s = 0; s < stays; ++s) {
        const int len = static_cast<int>(rng.below(8));
        base.push_back({"p" + std::to_string(p), day, day + len, EncounterKind::Inpatient, {"x"}});
        day += len + static_cast<int>(rng.below(140));
      }
    }
    std::stable_sort(base.begin(), base.end(), by_admit);
    auto noisy = base;
    const std::size_t extra = rng.below(10);
    for (std::size_t k = 0; k < extra; ++k) {
      const int day = static_cast<int>(rng.below(600));
      noisy.push_back({"p" + std::to_string(rng.below(patients + 1)), day, day + static_cast<int>(rng.below(20)),
                       rng.bernoulli(0.5) ? EncounterKind::Transfer : EncounterKind::Recurring, {"t"}});
    }
    std::stable_sort(noisy.begin(), noisy.end(), by_admit);
    const auto a = ehr::build_readmission_labels(base), b = ehr::build_readmission_labels(noisy);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].patient_id == b[i].patient_id && a[i].status == b[i].status && a[i].label == b[i].label &&
             a[i].gap_days == b[i].gap_days;
    }
    if (same) ++invariant;
  }
  return {windows && invariant == 1000, std::string("windows ") + (windows ? "ok" : "wrong") + ", insertion invariant in " +
                                            std::to_string(invariant) + "/1000 lists"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("seqbench-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "study.cfg");
    cfg << "max_epochs = 5\nspace.embed_dim = 8:16\nspace.hidden_size = 8:16\n";
  }
  bool ok = true;
  auto pipeline = [&](const std::string& tag) {
    const std::string p = (dir / tag).string();
    const std::vector<std::vector<std::string>> steps = {
        {"seqbench", "gen", "--task", "hf", "--patients", "600", "--seed", "42", "--out", p + ".cohort.jsonl"},
        {"seqbench", "split", "--in", p + ".cohort.jsonl", "--ratios", "7:1:2", "--seed", "42", "--out-prefix", p},
        {"seqbench", "hpo", "--arch", "GRU", "--budget", "3", "--workers", "1", "--seed", "42", "--data-prefix", p,
         "--config", (dir / "study.cfg").string(), "--out", p + ".ledger.jsonl"},
        {"seqbench", "report", "--ledgers", p + ".ledger.jsonl", "--out", p + ".report.csv"}};
    for (const auto& args : steps) ok = ok && cli::run_cli(args) == 0;
  };
  pipeline("a");
  pipeline("b");
  std::size_t identical = 0;
  const char* files[] = {".cohort.jsonl", ".train.jsonl", ".valid.jsonl", ".test.jsonl", ".ledger.jsonl", ".report.csv"};
  for (const char* f : files) {
    const std::string a = slurp(dir / ("a" + std::string(f))), b = slurp(dir / ("b" + std::string(f)));
    if (!a.empty() && a == b) ++identical;
  }
  fs::remove_all(dir);

  const auto table = eval::load_report_csv(std::string(SEQBENCH_FIXTURES) + "/table1.csv");
  const std::string csv = eval::report_csv(table);
  const bool fixture = csv.find("\nGRU,84.8,75.5\n") != std::string::npos;
  return {ok && identical == 6 && fixture, std::to_string(identical) + "/6 files byte-identical, fixture GRU row " +
                                               (fixture ? "84.8/75.5" : "wrong")};
}

}  // namespace

int main(int argc, char** argv) {
  log::set_level(log::Level::Warn);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient suite", gradient_suite},
      {"reduction identities", reduction_identities},
      {"AUROC oracle", auroc_oracle},
      {"optimizer fixtures", optimizer_fixtures},
      {"BO sanity", bo_sanity},
      {"planted-signal benchmark", planted_benchmark},
      {"cohort labeling", cohort_labeling},
      {"determinism", determinism},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(static_cast<std::size_t>(std::atoi(argv[i])));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), i + 1) == selected.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] criterion %zu, %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

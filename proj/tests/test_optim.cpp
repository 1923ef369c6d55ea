#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "seqbench/error.hpp"
#include "seqbench/eval/auroc.hpp"
#include "seqbench/models/models.hpp"
#include "seqbench/optim/optimizer.hpp"
#include "seqbench/optim/trainer.hpp"

using namespace seqbench;
using namespace seqbench::optim;

namespace {

ParameterSet single(double w) { return {{"w", Tensor({1}, w)}}; }

double step_once(Family f, double w, double g, double lr, double eps = 1e-8) {
  OptimizerConfig cfg = OptimizerConfig::defaults(f);
  cfg.lr = lr;
  cfg.eps = eps;
  ParameterSet p = single(w);
  OptimizerState s;
  optimizer_step(p, single(g), s, cfg);
  return p.at("w")[0];
}

// Two cohorts of codes that never mix: label 1 uses 1..4, label 0 uses 5..8.
std::vector<ehr::PatientRecord> separable(std::size_t n, Rng& rng) {
  std::vector<ehr::PatientRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    ehr::PatientRecord r{"P" + std::to_string(i), label, {}};
    const std::size_t visits = 1 + rng.below(4);
    for (std::size_t v = 0; v < visits; ++v) {
      r.visits.push_back(ehr::Visit{v == 0 ? 0 : 10, {static_cast<std::int32_t>((label ? 1 : 5) + rng.below(4))}});
    }
    out.push_back(std::move(r));
  }
  return out;
}

models::ModelSpec gru(std::size_t hidden) {
  models::ModelSpec s;
  s.arch = models::Architecture::GRU;
  s.vocab_size = 9;
  s.embed_dim = 4;
  s.hidden_size = hidden;
  return s;
}

}  // namespace

TEST_CASE("first steps match hand arithmetic") {
  CHECK(step_once(Family::SGD, 1.0, 0.5, 0.1) == doctest::Approx(0.95).epsilon(1e-15));

  const double adam = step_once(Family::Adam, 0.0, 2.0, 0.1);
  CHECK(std::abs(adam - (-0.1 * 2.0 / (2.0 + 1e-8))) <= 1e-12);

  const double adagrad = step_once(Family::Adagrad, 1.0, 0.5, 0.1);
  CHECK(std::abs(adagrad - (1.0 - 0.1 * 0.5 / (0.5 + 1e-8))) <= 1e-12);
}

TEST_CASE("adam two-step trace on a constant gradient") {
  OptimizerConfig cfg = OptimizerConfig::defaults(Family::Adam);
  cfg.lr = 0.05;
  ParameterSet p = single(0.3);
  OptimizerState s;
  double w = 0.3, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    optimizer_step(p, single(1.0), s, cfg);
    m = 0.9 * m + 0.1;
    v = 0.999 * v + 0.001;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    w -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(std::abs(p.at("w")[0] - w) <= 1e-12);
  }
}

TEST_CASE("weight decay is added to the gradient") {
  OptimizerConfig cfg = OptimizerConfig::defaults(Family::SGD);
  cfg.lr = 0.1;
  cfg.weight_decay = 0.5;
  ParameterSet p = single(2.0);
  OptimizerState s;
  optimizer_step(p, single(0.0), s, cfg);
  CHECK(p.at("w")[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0).epsilon(1e-15));
}

TEST_CASE("every family decreases a quadratic") {
  for (Family f : all_families()) {
    CAPTURE(family_name(f));
    const OptimizerConfig cfg = OptimizerConfig::defaults(f);
    ParameterSet p{{"w", Tensor({3}, 10.0)}};
    OptimizerState s;
    auto norm = [](const ParameterSet& ps) {
      double n = 0;
      for (double v : ps.at("w").storage()) n += v * v;
      return n;
    };
    const double start = norm(p);
    for (int i = 0; i < 200; ++i) {
      ParameterSet g{{"w", Tensor({3})}};
      for (std::size_t k = 0; k < 3; ++k) g.at("w")[k] = 2.0 * p.at("w")[k];
      optimizer_step(p, g, s, cfg);
    }
    CHECK(norm(evaluation_parameters(p, s, cfg)) < start);
  }
}

TEST_CASE("zero gradient without decay is a fixed point") {
  for (Family f : all_families()) {
    CAPTURE(family_name(f));
    const OptimizerConfig cfg = OptimizerConfig::defaults(f);
    ParameterSet p{{"w", Tensor({2}, std::vector<double>{1.5, -0.25})}};
    OptimizerState s;
    for (int i = 0; i < 5; ++i) optimizer_step(p, ParameterSet{{"w", Tensor({2})}}, s, cfg);
    const ParameterSet e = evaluation_parameters(p, s, cfg);
    CHECK(std::abs(e.at("w")[0] - 1.5) <= 1e-15);
    CHECK(std::abs(e.at("w")[1] + 0.25) <= 1e-15);
  }
}

TEST_CASE("optimizer errors") {
  OptimizerConfig cfg = OptimizerConfig::defaults(Family::Adam);
  ParameterSet p{{"embedding", Tensor({2}, 1.0)}};
  OptimizerState s;
  try {
    optimizer_step(p, ParameterSet{{"embedding", Tensor({2}, NAN)}}, s, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("embedding") != std::string::npos);
  }
  CHECK_THROWS_AS(optimizer_step(p, ParameterSet{{"embedding", Tensor({3}, 1.0)}}, s, cfg), DimensionError);
  cfg.lr = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  CHECK(parse_family("rmsprop") == Family::RMSprop);
  CHECK_THROWS(parse_family("lion"));
}

TEST_CASE("training is deterministic and returns the best validation parameters") {
  Rng rng(5);
  const auto train = separable(120, rng), valid = separable(40, rng);
  TrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.batch_size = 16;
  cfg.seed = 3;
  const auto spec = gru(6);
  OptimizerConfig opt = OptimizerConfig::defaults(Family::Adam);
  opt.lr = 0.01;
  const auto a = train_model(spec, models::init_parameters(spec, 1), train, valid, opt, cfg);
  const auto b = train_model(spec, models::init_parameters(spec, 1), train, valid, opt, cfg);
  CHECK(models::parameter_checksum(a.best_params) == models::parameter_checksum(b.best_params));

  double best = 0.0;
  for (const auto& e : a.history) best = std::max(best, e.valid_auroc);
  std::vector<double> labels;
  for (const auto& r : valid) labels.push_back(r.label);
  CHECK(eval::auroc(models::predict_proba(spec, a.best_params, valid), labels) == best);
  CHECK(a.best_valid_auroc == best);
}

TEST_CASE("constant validation score stops after patience epochs") {
  Rng rng(6);
  const auto train = separable(40, rng);
  std::vector<ehr::PatientRecord> valid;
  for (int i = 0; i < 10; ++i) valid.push_back({"V" + std::to_string(i), i % 2, {ehr::Visit{0, {3}}}});
  TrainConfig cfg;
  cfg.patience = 5;
  const auto spec = gru(4);
  const auto r = train_model(spec, models::init_parameters(spec, 1), train, valid,
                             OptimizerConfig::defaults(Family::SGD), cfg);
  CHECK(r.history.size() == cfg.patience + 1);
  CHECK(r.best_epoch == 1);
}

TEST_CASE("separable cohort reaches perfect validation AUROC") {
  Rng rng(7);
  const auto train = separable(200, rng), valid = separable(60, rng);
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.batch_size = 32;
  const auto spec = gru(8);
  OptimizerConfig opt = OptimizerConfig::defaults(Family::Adam);
  opt.lr = 0.01;
  const auto r = train_model(spec, models::init_parameters(spec, 2), train, valid, opt, cfg);
  CHECK(r.best_valid_auroc == 1.0);
}

TEST_CASE("training preconditions") {
  Rng rng(8);
  const auto train = separable(20, rng);
  std::vector<ehr::PatientRecord> one_class;
  for (int i = 0; i < 4; ++i) one_class.push_back({"V" + std::to_string(i), 1, {ehr::Visit{0, {3}}}});
  const auto spec = gru(4);
  CHECK_THROWS_AS(train_model(spec, models::init_parameters(spec, 1), train, one_class,
                              OptimizerConfig::defaults(Family::SGD), TrainConfig{}),
                  ValidationError);
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("history csv") {
  std::ostringstream out;
  write_history_csv(out, {{1, 0.5, 0.75}});
  CHECK(out.str() == "epoch,train_loss,valid_auroc\n1,0.5,0.75\n");
}

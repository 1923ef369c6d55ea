#include "seqbench/ehr/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "seqbench/error.hpp"
#include "seqbench/numerics/ops.hpp"
#include "seqbench/numerics/rng.hpp"

namespace seqbench::ehr {

Task parse_task(std::string_view name) {
  if (name == "hf") return Task::HeartFailure;
  if (name == "readm") return Task::Readmission;
  throw ValidationError("unknown task '" + std::string(name) + "' (expected hf or readm)");
}

std::string_view task_name(Task task) { return task == Task::HeartFailure ? "hf" : "readm"; }

GeneratorSpec GeneratorSpec::for_task(Task task) {
  GeneratorSpec spec;
  spec.target_prevalence = task == Task::HeartFailure ? 5010.0 / (5010.0 + 37719.0) : 5897.0 / (5897.0 + 4757.0);
  return spec;
}

void validate(const GeneratorSpec& spec) {
  auto fail = [](const std::string& what) { throw ValidationError("generator spec: " + what); };
  if (spec.n_patients == 0) fail("n_patients must be positive");
  if (spec.vocab_size < 2 * spec.interaction_pairs + 2) fail("vocab_size too small for the interaction pairs");
  if (!(spec.risk_code_fraction > 0.0 && spec.risk_code_fraction <= 1.0)) fail("risk_code_fraction must be in (0,1]");
  if (!(spec.mean_visits >= 1.0)) fail("mean_visits must be >= 1");
  if (!(spec.mean_codes_per_visit >= 1.0)) fail("mean_codes_per_visit must be >= 1");
  if (!(spec.mean_gap_days >= 1.0)) fail("mean_gap_days must be >= 1");
  if (!(spec.interaction_strength > 0.0)) fail("interaction_strength must be positive");
  if (!(spec.pair_rate > 0.0 && spec.pair_rate <= 1.0)) fail("pair_rate must be in (0,1]");
  if (!(spec.time_decay_rate > 0.0)) fail("time_decay_rate must be positive");
  if (!(spec.target_prevalence > 0.0 && spec.target_prevalence < 1.0)) fail("target_prevalence must be in (0,1)");
}

double latent_risk(const PatientRecord& record, const PlantedSignal& signal) {
  const std::size_t n = record.visits.size();
  std::vector<long> day(n, 0);
  for (std::size_t t = 1; t < n; ++t) day[t] = day[t - 1] + record.visits[t].delta_days;

  double risk = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double decay = std::exp(-signal.time_decay_rate * static_cast<double>(day[n - 1] - day[t]));
    for (std::int32_t c : record.visits[t].codes) {
      if (static_cast<std::size_t>(c) < signal.code_weight.size()) risk += signal.code_weight[c] * decay;
    }
  }

  for (const auto& [a, b] : signal.ordered_pairs) {
    long first_a = -1, last_a = -1, first_b = -1, last_b = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& codes = record.visits[t].codes;
      const auto ti = static_cast<long>(t);
      if (std::find(codes.begin(), codes.end(), a) != codes.end()) {
        if (first_a < 0) first_a = ti;
        last_a = ti;
      }
      if (std::find(codes.begin(), codes.end(), b) != codes.end()) {
        if (first_b < 0) first_b = ti;
        last_b = ti;
      }
    }
    if (first_a < 0 || first_b < 0) continue;
    const bool a_then_b = first_a < last_b;
    const bool b_then_a = first_b < last_a;
    if (a_then_b && !b_then_a) risk += signal.interaction_strength;
    if (b_then_a && !a_then_b) risk -= signal.interaction_strength;
  }
  return risk;
}

namespace {

std::string code_name(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%05zu", id);
  return buf;
}

double mean_probability(const std::vector<double>& risk, double bias) {
  double total = 0.0;
  for (double r : risk) total += sigmoid(bias + r);
  return total / static_cast<double>(risk.size());
}

}  // namespace

GeneratedCohort generate_cohort(const GeneratorSpec& spec) {
  validate(spec);
  const Rng root(spec.seed);
  GeneratedCohort out;
  Vocabulary& vocab = out.cohort.vocab;
  for (std::size_t id = 1; id < spec.vocab_size; ++id) vocab.add(code_name(id));

  // Planted structure: a shuffled id list supplies the pair codes first,
  // then the background codes, of which a fraction carry a weight.
  Rng signal_rng = root.derive("signal");
  std::vector<std::int32_t> ids(spec.vocab_size - 1);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(i + 1);
  signal_rng.shuffle(std::span<std::int32_t>(ids));

  PlantedSignal& signal = out.signal;
  signal.code_weight.assign(spec.vocab_size, 0.0);
  signal.interaction_strength = spec.interaction_strength;
  signal.time_decay_rate = spec.time_decay_rate;
  for (std::size_t k = 0; k < spec.interaction_pairs; ++k) {
    signal.ordered_pairs.emplace_back(ids[2 * k], ids[2 * k + 1]);
  }
  const std::vector<std::int32_t> background(ids.begin() + static_cast<long>(2 * spec.interaction_pairs), ids.end());
  const auto n_risk = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(spec.risk_code_fraction * static_cast<double>(background.size()))));
  for (std::size_t k = 0; k < n_risk && k < background.size(); ++k) {
    const double sign = signal_rng.bernoulli(0.5) ? 1.0 : -1.0;
    signal.code_weight[background[k]] = sign * signal_rng.uniform(1.0, 2.5);
  }

  auto& records = out.cohort.records;
  records.resize(spec.n_patients);
  out.risk.resize(spec.n_patients);
  for (std::size_t i = 0; i < spec.n_patients; ++i) {
    Rng rng = root.derive("patient", i);
    PatientRecord& rec = records[i];
    char id[32];
    std::snprintf(id, sizeof id, "P%07zu", i);
    rec.patient_id = id;

    const std::size_t n_visits = 1 + static_cast<std::size_t>(rng.poisson(spec.mean_visits - 1.0));
    std::vector<std::set<std::int32_t>> visit_codes(n_visits);
    for (auto& codes : visit_codes) {
      const std::size_t want =
          std::min(background.size(), 1 + static_cast<std::size_t>(rng.poisson(spec.mean_codes_per_visit - 1.0)));
      while (codes.size() < want) codes.insert(background[rng.below(background.size())]);
    }
    for (const auto& [a, b] : signal.ordered_pairs) {
      if (n_visits < 2 || !rng.bernoulli(spec.pair_rate)) continue;
      const std::size_t first = rng.below(n_visits);
      std::size_t second = rng.below(n_visits - 1);
      if (second >= first) ++second;
      visit_codes[first].insert(a);
      visit_codes[second].insert(b);
    }
    rec.visits.resize(n_visits);
    for (std::size_t t = 0; t < n_visits; ++t) {
      rec.visits[t].delta_days = t == 0 ? 0 : rng.geometric(1.0 / spec.mean_gap_days);
      rec.visits[t].codes.assign(visit_codes[t].begin(), visit_codes[t].end());
    }
    out.risk[i] = latent_risk(rec, signal);
  }

  double lo = -60.0, hi = 60.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mean_probability(out.risk, mid) < spec.target_prevalence ? lo : hi) = mid;
  }
  signal.bias = 0.5 * (lo + hi);
  if (std::abs(mean_probability(out.risk, signal.bias) - spec.target_prevalence) > 1e-6) {
    throw ValidationError("generator: target prevalence " + std::to_string(spec.target_prevalence) +
                          " unreachable with the planted weights");
  }

  for (std::size_t i = 0; i < spec.n_patients; ++i) {
    Rng label_rng = root.derive("label", i);
    records[i].label = label_rng.uniform() < sigmoid(signal.bias + out.risk[i]) ? 1 : 0;
  }
  return out;
}

}  // namespace seqbench::ehr

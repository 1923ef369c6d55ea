#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "seqbench/ehr/types.hpp"

namespace seqbench::ehr {

enum class Task { HeartFailure, Readmission };

Task parse_task(std::string_view name);
std::string_view task_name(Task task);

/// Knobs of the synthetic cohort. Sizes are counts, rates are per day.
struct GeneratorSpec {
  std::size_t n_patients = 1000;
  std::size_t vocab_size = 300;  // ids 1..vocab_size-1 are codes, 0 is PAD
  double risk_code_fraction = 0.1;
  double mean_visits = 8.0;
  double mean_codes_per_visit = 4.0;
  double mean_gap_days = 60.0;
  double interaction_strength = 4.0;
  std::size_t interaction_pairs = 4;
  double pair_rate = 0.5;  // chance a patient carries a given ordered pair
  double time_decay_rate = 1.0 / 365.0;
  double target_prevalence = 0.5;
  std::uint64_t seed = 42;

  /// Defaults whose prevalence matches the reference cohort sizes
  /// (5,010 / 42,729 heart-failure cases; 5,897 / 10,654 readmission cases).
  static GeneratorSpec for_task(Task task);
};

void validate(const GeneratorSpec& spec);

/// Ground truth of the planted signal, enough to recompute any patient's risk.
struct PlantedSignal {
  std::vector<double> code_weight;  // indexed by code id; 0 for neutral codes
  std::vector<std::pair<std::int32_t, std::int32_t>> ordered_pairs;
  double interaction_strength = 0.0;
  double time_decay_rate = 0.0;
  double bias = 0.0;
};

/// Latent log-odds contribution of a record under the planted signal, bias excluded:
/// sum over visits of w(code) * exp(-decay * age_days) plus, per designated pair
/// (a, b), +strength when a occurs strictly before b only and -strength when b
/// occurs strictly before a only.
double latent_risk(const PatientRecord& record, const PlantedSignal& signal);

struct GeneratedCohort {
  Cohort cohort;
  PlantedSignal signal;
  std::vector<double> risk;  // latent_risk per record, bias excluded
};

/// Deterministic given spec.seed. Patient i depends only on (seed, i) apart
/// from the shared calibration bias. Throws ValidationError if the target
/// prevalence cannot be reached by bisection on the bias.
GeneratedCohort generate_cohort(const GeneratorSpec& spec);

}  // namespace seqbench::ehr

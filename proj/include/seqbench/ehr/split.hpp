#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "seqbench/ehr/types.hpp"

namespace seqbench::ehr {

struct SplitRatios {
  double train = 0.7;
  double valid = 0.1;
  double test = 0.2;

  /// Parses "7:1:2" style ratios and normalizes them to sum to 1.
  static SplitRatios parse(std::string_view text);
};

struct CohortSplit {
  std::vector<PatientRecord> train;
  std::vector<PatientRecord> valid;
  std::vector<PatientRecord> test;
  bool stratified = true;
};

/// Stratified by label: each class is shuffled with a seed-derived stream and
/// sliced with floor rounding for valid/test, the remainder going to train.
/// Falls back to an unstratified split (and logs a warning) when a class has
/// fewer than 3 members. Requires at least 10 records.
CohortSplit split_cohort(const std::vector<PatientRecord>& records, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace seqbench::ehr

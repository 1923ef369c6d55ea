#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqbench/ehr/types.hpp"

namespace seqbench::ehr {

enum class EncounterKind { Inpatient, Transfer, Recurring, Other };

EncounterKind parse_encounter_kind(std::string_view name);
std::string_view encounter_kind_name(EncounterKind kind);

struct Encounter {
  std::string patient_id;
  int admit_day = 0;
  int discharge_day = 0;
  EncounterKind kind = EncounterKind::Inpatient;
  std::vector<std::string> codes;

  bool operator==(const Encounter&) const = default;
};

/// Readmission windows, in days between a discharge and the next admission.
inline constexpr int kCaseGapBelow = 30;     // gap < 30 is a case
inline constexpr int kControlGapAbove = 90;  // gap > 90 is a control

enum class ReadmissionStatus { Case, Control, ExcludedMidGap, ExcludedNoReadmission };

struct ReadmissionOutcome {
  std::string patient_id;
  ReadmissionStatus status = ReadmissionStatus::ExcludedNoReadmission;
  std::optional<int> label;           // set for cases (1) and controls (0)
  std::optional<std::size_t> index;   // position of the index encounter in the input list
  std::optional<int> gap_days;
};

/// One outcome per patient with an inpatient encounter, in order of first
/// inpatient encounter. Only inpatient encounters qualify; the first
/// consecutive inpatient pair defines the gap and its first stay is the index.
/// Throws ValidationError for unsorted encounters, discharge before admit, or
/// overlapping inpatient stays.
std::vector<ReadmissionOutcome> build_readmission_labels(const std::vector<Encounter>& encounters);

/// Turns labeled outcomes into modeling records. A patient's visits are its
/// encounters up to and including the index encounter, transfer and recurring
/// encounters left out, coded through `vocab`.
std::vector<PatientRecord> readmission_records(const std::vector<Encounter>& encounters,
                                               const std::vector<ReadmissionOutcome>& outcomes, Vocabulary& vocab);

}  // namespace seqbench::ehr

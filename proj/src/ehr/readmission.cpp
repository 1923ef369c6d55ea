#include "seqbench/ehr/readmission.hpp"

#include <algorithm>
#include <map>

#include "seqbench/error.hpp"

namespace seqbench::ehr {

EncounterKind parse_encounter_kind(std::string_view name) {
  if (name == "inpatient") return EncounterKind::Inpatient;
  if (name == "transfer") return EncounterKind::Transfer;
  if (name == "recurring") return EncounterKind::Recurring;
  if (name == "other") return EncounterKind::Other;
  throw ValidationError("unknown encounter kind '" + std::string(name) + "'");
}

std::string_view encounter_kind_name(EncounterKind kind) {
  switch (kind) {
    case EncounterKind::Inpatient: return "inpatient";
    case EncounterKind::Transfer: return "transfer";
    case EncounterKind::Recurring: return "recurring";
    case EncounterKind::Other: return "other";
  }
  return "other";
}

namespace {

// Positions of each patient's encounters, patients in order of first appearance.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_patient(const std::vector<Encounter>& encounters) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::map<std::string, std::size_t, std::less<>> slot;
  for (std::size_t i = 0; i < encounters.size(); ++i) {
    const auto& id = encounters[i].patient_id;
    auto [it, inserted] = slot.emplace(id, groups.size());
    if (inserted) groups.emplace_back(id, std::vector<std::size_t>{});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<ReadmissionOutcome> build_readmission_labels(const std::vector<Encounter>& encounters) {
  std::vector<std::pair<std::size_t, ReadmissionOutcome>> keyed;
  for (const auto& [patient, positions] : group_by_patient(encounters)) {
    const Encounter* prev_any = nullptr;
    const Encounter* prev_inpatient = nullptr;
    for (std::size_t pos : positions) {
      const Encounter& e = encounters[pos];
      if (e.discharge_day < e.admit_day) {
        throw ValidationError("patient '" + patient + "': discharge before admit at encounter " + std::to_string(pos));
      }
      if (prev_any && e.admit_day < prev_any->admit_day) {
        throw ValidationError("patient '" + patient + "': encounters not sorted by admit_day at encounter " +
                              std::to_string(pos));
      }
      if (e.kind == EncounterKind::Inpatient) {
        if (prev_inpatient && e.admit_day < prev_inpatient->discharge_day) {
          throw ValidationError("patient '" + patient + "': overlapping inpatient stays at encounter " +
                                std::to_string(pos));
        }
        prev_inpatient = &e;
      }
      prev_any = &e;
    }

    auto first_inpatient = std::find_if(positions.begin(), positions.end(), [&](std::size_t pos) {
      return encounters[pos].kind == EncounterKind::Inpatient;
    });
    if (first_inpatient == positions.end()) continue;

    ReadmissionOutcome out;
    out.patient_id = patient;
    std::optional<std::size_t> first;
    for (std::size_t pos : positions) {
      if (encounters[pos].kind != EncounterKind::Inpatient) continue;
      if (!first) {
        first = pos;
        continue;
      }
      const int gap = encounters[pos].admit_day - encounters[*first].discharge_day;
      out.index = first;
      out.gap_days = gap;
      if (gap < kCaseGapBelow) {
        out.status = ReadmissionStatus::Case;
        out.label = 1;
      } else if (gap > kControlGapAbove) {
        out.status = ReadmissionStatus::Control;
        out.label = 0;
      } else {
        out.status = ReadmissionStatus::ExcludedMidGap;
      }
      break;
    }
    keyed.emplace_back(*first_inpatient, std::move(out));
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ReadmissionOutcome> outcomes;
  for (auto& [pos, out] : keyed) outcomes.push_back(std::move(out));
  return outcomes;
}

std::vector<PatientRecord> readmission_records(const std::vector<Encounter>& encounters,
                                               const std::vector<ReadmissionOutcome>& outcomes, Vocabulary& vocab) {
  std::map<std::string, std::vector<std::size_t>, std::less<>> positions;
  for (std::size_t i = 0; i < encounters.size(); ++i) positions[encounters[i].patient_id].push_back(i);

  std::vector<PatientRecord> records;
  for (const auto& o : outcomes) {
    if (!o.label || !o.index) continue;
    PatientRecord rec;
    rec.patient_id = o.patient_id;
    rec.label = *o.label;
    const Encounter* prev = nullptr;
    for (std::size_t pos : positions.at(o.patient_id)) {
      if (pos > *o.index) break;
      const Encounter& e = encounters[pos];
      if (e.kind == EncounterKind::Transfer || e.kind == EncounterKind::Recurring) continue;
      Visit v;
      v.delta_days = prev ? e.admit_day - prev->admit_day : 0;
      for (const auto& code : e.codes) v.codes.push_back(vocab.add(code));
      std::sort(v.codes.begin(), v.codes.end());
      v.codes.erase(std::unique(v.codes.begin(), v.codes.end()), v.codes.end());
      rec.visits.push_back(std::move(v));
      prev = &e;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace seqbench::ehr

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "seqbench/ehr/readmission.hpp"
#include "seqbench/ehr/types.hpp"

namespace seqbench::ehr {

inline constexpr std::string_view kCohortSchema = "seqbench-cohort/1";

/// JSON Lines: a header {"schema":..., "vocab":{code:id}} followed by one
/// {"id","label","visits":[{"dt","codes"}]} object per patient.
void write_cohort(std::ostream& out, const Cohort& cohort);
/// A zero-byte stream is an empty cohort; otherwise the header is mandatory.
/// Errors name the 1-based line number.
Cohort read_cohort(std::istream& in);

void save_cohort(const std::filesystem::path& path, const Cohort& cohort);
Cohort load_cohort(const std::filesystem::path& path);

/// JSON Lines of {"patient_id","admit_day","discharge_day","kind","codes"}.
void write_encounters(std::ostream& out, const std::vector<Encounter>& encounters);
std::vector<Encounter> read_encounters(std::istream& in);
std::vector<Encounter> load_encounters(const std::filesystem::path& path);

}  // namespace seqbench::ehr

#include "seqbench/ehr/cohort_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "seqbench/error.hpp"

namespace seqbench::ehr {

using nlohmann::json;

namespace {

json record_to_json(const PatientRecord& r) {
  json visits = json::array();
  for (const Visit& v : r.visits) visits.push_back({{"dt", v.delta_days}, {"codes", v.codes}});
  return {{"id", r.patient_id}, {"label", r.label}, {"visits", std::move(visits)}};
}

PatientRecord record_from_json(const json& j) {
  PatientRecord r;
  r.patient_id = j.at("id").get<std::string>();
  r.label = j.at("label").get<int>();
  for (const json& v : j.at("visits")) {
    Visit visit;
    visit.delta_days = v.at("dt").get<int>();
    visit.codes = v.at("codes").get<std::vector<std::int32_t>>();
    r.visits.push_back(std::move(visit));
  }
  return r;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw IoError("line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_cohort(std::ostream& out, const Cohort& cohort) {
  json vocab = json::object();
  for (const auto& [code, id] : cohort.vocab.entries()) vocab[code] = id;
  out << json{{"schema", kCohortSchema}, {"vocab", std::move(vocab)}}.dump() << '\n';
  for (const auto& r : cohort.records) out << record_to_json(r).dump() << '\n';
}

Cohort read_cohort(std::istream& in) {
  Cohort cohort;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_line(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        if (!j.is_object() || !j.contains("schema")) fail_line(line_no, "missing cohort header");
        const auto schema = j.at("schema").get<std::string>();
        if (schema != kCohortSchema) fail_line(line_no, "unknown schema version '" + schema + "'");
        if (!j.contains("vocab") || !j.at("vocab").is_object()) fail_line(line_no, "header lacks a vocab object");
        std::map<std::string, std::int32_t, std::less<>> entries;
        for (const auto& [code, id] : j.at("vocab").items()) entries.emplace(code, id.get<std::int32_t>());
        cohort.vocab = Vocabulary::from_entries(entries);
        have_header = true;
        continue;
      }
      PatientRecord r = record_from_json(j);
      validate_record(r, cohort.vocab.size());
      cohort.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail_line(line_no, std::string("bad record: ") + e.what());
    } catch (const ValidationError& e) {
      fail_line(line_no, e.what());
    }
  }
  return cohort;
}

void save_cohort(const std::filesystem::path& path, const Cohort& cohort) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_cohort(out, cohort);
  if (!out) throw IoError("write failed for " + path.string());
}

Cohort load_cohort(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_cohort(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_encounters(std::ostream& out, const std::vector<Encounter>& encounters) {
  for (const auto& e : encounters) {
    out << json{{"patient_id", e.patient_id},
                {"admit_day", e.admit_day},
                {"discharge_day", e.discharge_day},
                {"kind", encounter_kind_name(e.kind)},
                {"codes", e.codes}}
               .dump()
        << '\n';
  }
}

std::vector<Encounter> read_encounters(std::istream& in) {
  std::vector<Encounter> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Encounter e;
      e.patient_id = j.at("patient_id").get<std::string>();
      e.admit_day = j.at("admit_day").get<int>();
      e.discharge_day = j.at("discharge_day").get<int>();
      e.kind = parse_encounter_kind(j.at("kind").get<std::string>());
      if (j.contains("codes")) e.codes = j.at("codes").get<std::vector<std::string>>();
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      fail_line(line_no, e.what());
    } catch (const ValidationError& e) {
      fail_line(line_no, e.what());
    }
  }
  return out;
}

std::vector<Encounter> load_encounters(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_encounters(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace seqbench::ehr

#include <algorithm>

#include "seqbench/ehr/types.hpp"
#include "seqbench/error.hpp"

namespace seqbench::ehr {

std::int32_t Vocabulary::add(std::string_view code) {
  if (auto it = ids_.find(code); it != ids_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(codes_.size() + 1);
  codes_.emplace_back(code);
  ids_.emplace(std::string(code), id);
  return id;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view code) const {
  if (auto it = ids_.find(code); it != ids_.end()) return it->second;
  return std::nullopt;
}

const std::string& Vocabulary::code(std::int32_t id) const {
  if (id <= 0 || static_cast<std::size_t>(id) > codes_.size()) {
    throw ValidationError("vocabulary has no code with id " + std::to_string(id));
  }
  return codes_[static_cast<std::size_t>(id - 1)];
}

Vocabulary Vocabulary::from_entries(const std::map<std::string, std::int32_t, std::less<>>& entries) {
  Vocabulary vocab;
  vocab.codes_.resize(entries.size());
  std::vector<bool> seen(entries.size() + 1, false);
  for (const auto& [code, id] : entries) {
    if (id <= 0 || static_cast<std::size_t>(id) > entries.size() || seen[static_cast<std::size_t>(id)]) {
      throw ValidationError("vocabulary ids must be a permutation of 1.." + std::to_string(entries.size()) +
                            "; bad id " + std::to_string(id) + " for code '" + code + "'");
    }
    seen[static_cast<std::size_t>(id)] = true;
    vocab.codes_[static_cast<std::size_t>(id - 1)] = code;
  }
  vocab.ids_ = entries;
  return vocab;
}

void validate_record(const PatientRecord& record, std::size_t vocab_size) {
  const std::string who = "patient '" + record.patient_id + "': ";
  if (record.label != 0 && record.label != 1) throw ValidationError(who + "label must be 0 or 1");
  if (record.visits.empty()) throw ValidationError(who + "needs at least one visit");
  for (const Visit& v : record.visits) {
    if (v.delta_days < 0) throw ValidationError(who + "negative delta_days");
    for (std::int32_t c : v.codes) {
      if (c <= Vocabulary::kPad || static_cast<std::size_t>(c) >= vocab_size) {
        throw ValidationError(who + "code id " + std::to_string(c) + " outside vocabulary");
      }
    }
  }
}

}  // namespace seqbench::ehr

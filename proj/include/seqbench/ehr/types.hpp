#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace seqbench::ehr {

struct Visit {
  int delta_days = 0;  // days since the previous visit; 0 for the first
  std::vector<std::int32_t> codes;

  bool operator==(const Visit&) const = default;
};

struct PatientRecord {
  std::string patient_id;
  int label = 0;
  std::vector<Visit> visits;

  bool operator==(const PatientRecord&) const = default;
};

/// Code string <-> id map. Id 0 is reserved for padding and never names a code.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;

  /// Returns the existing id for `code` or assigns the next free one.
  std::int32_t add(std::string_view code);
  std::optional<std::int32_t> find(std::string_view code) const;
  const std::string& code(std::int32_t id) const;

  /// Number of ids including PAD; every valid code id is < size().
  std::size_t size() const { return codes_.size() + 1; }
  std::size_t code_count() const { return codes_.size(); }
  const std::map<std::string, std::int32_t, std::less<>>& entries() const { return ids_; }

  /// Rebuilds a vocabulary from a code -> id map; ids must be exactly 1..n.
  static Vocabulary from_entries(const std::map<std::string, std::int32_t, std::less<>>& entries);

  bool operator==(const Vocabulary& other) const { return ids_ == other.ids_; }

 private:
  std::map<std::string, std::int32_t, std::less<>> ids_;
  std::vector<std::string> codes_;  // codes_[id - 1]
};

struct Cohort {
  std::vector<PatientRecord> records;
  Vocabulary vocab;

  bool operator==(const Cohort&) const = default;
};

/// Throws ValidationError if the record breaks any PatientRecord/Visit invariant.
void validate_record(const PatientRecord& record, std::size_t vocab_size);

}  // namespace seqbench::ehr

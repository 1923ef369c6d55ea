#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqbench/ehr/types.hpp"

namespace seqbench::ehr {

/// Padded mini-batch. Layouts are row-major: codes/code_mask are
/// [batch x steps x max_codes], visit_mask/delta_days are [batch x steps].
/// Unused slots hold PAD (0) with mask 0; real visits are left-aligned.
struct PaddedBatch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::size_t max_codes = 0;
  std::vector<std::int32_t> codes;
  std::vector<std::uint8_t> code_mask;
  std::vector<std::uint8_t> visit_mask;
  std::vector<double> delta_days;
  std::vector<double> labels;
  std::vector<std::size_t> lengths;  // real visits per row

  std::int32_t code(std::size_t b, std::size_t t, std::size_t c) const {
    return codes[(b * steps + t) * max_codes + c];
  }
  bool real_visit(std::size_t b, std::size_t t) const { return visit_mask[b * steps + t] != 0; }

  /// Ids and mask of one time step as contiguous [batch x max_codes] blocks.
  std::vector<std::int32_t> step_codes(std::size_t t) const;
  std::vector<std::uint8_t> step_code_mask(std::size_t t) const;
  /// visit_mask column t.
  std::vector<std::uint8_t> step_mask(std::size_t t) const;
};

PaddedBatch make_batch(std::span<const PatientRecord* const> records);
PaddedBatch make_batch(std::span<const PatientRecord> records);

/// Consecutive chunks of at most batch_size records, order preserved.
std::vector<PaddedBatch> batch_visits(std::span<const PatientRecord> records, std::size_t batch_size);

/// The same batch with each row's real visits in reverse order (padding stays at the tail).
PaddedBatch reverse_real(const PaddedBatch& batch);

}  // namespace seqbench::ehr

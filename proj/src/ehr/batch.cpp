#include "seqbench/ehr/batch.hpp"

#include <algorithm>

#include "seqbench/error.hpp"

namespace seqbench::ehr {

std::vector<std::int32_t> PaddedBatch::step_codes(std::size_t t) const {
  std::vector<std::int32_t> out(batch * max_codes);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(codes.begin() + static_cast<long>((b * steps + t) * max_codes), max_codes,
                out.begin() + static_cast<long>(b * max_codes));
  }
  return out;
}

std::vector<std::uint8_t> PaddedBatch::step_code_mask(std::size_t t) const {
  std::vector<std::uint8_t> out(batch * max_codes);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(code_mask.begin() + static_cast<long>((b * steps + t) * max_codes), max_codes,
                out.begin() + static_cast<long>(b * max_codes));
  }
  return out;
}

std::vector<std::uint8_t> PaddedBatch::step_mask(std::size_t t) const {
  std::vector<std::uint8_t> out(batch);
  for (std::size_t b = 0; b < batch; ++b) out[b] = visit_mask[b * steps + t];
  return out;
}

PaddedBatch make_batch(std::span<const PatientRecord* const> records) {
  if (records.empty()) throw ValidationError("cannot batch zero records");
  PaddedBatch out;
  out.batch = records.size();
  for (const PatientRecord* r : records) {
    if (r->visits.empty()) throw ValidationError("patient '" + r->patient_id + "' has no visits");
    out.steps = std::max(out.steps, r->visits.size());
    for (const Visit& v : r->visits) out.max_codes = std::max(out.max_codes, v.codes.size());
  }
  const std::size_t cells = out.batch * out.steps;
  out.codes.assign(cells * out.max_codes, Vocabulary::kPad);
  out.code_mask.assign(cells * out.max_codes, 0);
  out.visit_mask.assign(cells, 0);
  out.delta_days.assign(cells, 0.0);
  out.labels.resize(out.batch);
  out.lengths.resize(out.batch);
  for (std::size_t b = 0; b < out.batch; ++b) {
    const PatientRecord& r = *records[b];
    out.labels[b] = static_cast<double>(r.label);
    out.lengths[b] = r.visits.size();
    for (std::size_t t = 0; t < r.visits.size(); ++t) {
      const Visit& v = r.visits[t];
      out.visit_mask[b * out.steps + t] = 1;
      out.delta_days[b * out.steps + t] = static_cast<double>(v.delta_days);
      for (std::size_t c = 0; c < v.codes.size(); ++c) {
        const std::size_t at = (b * out.steps + t) * out.max_codes + c;
        out.codes[at] = v.codes[c];
        out.code_mask[at] = 1;
      }
    }
  }
  return out;
}

PaddedBatch make_batch(std::span<const PatientRecord> records) {
  std::vector<const PatientRecord*> ptrs;
  ptrs.reserve(records.size());
  for (const auto& r : records) ptrs.push_back(&r);
  return make_batch(std::span<const PatientRecord* const>(ptrs));
}

std::vector<PaddedBatch> batch_visits(std::span<const PatientRecord> records, std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  std::vector<PaddedBatch> out;
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    out.push_back(make_batch(records.subspan(start, std::min(batch_size, records.size() - start))));
  }
  return out;
}

PaddedBatch reverse_real(const PaddedBatch& batch) {
  PaddedBatch out = batch;
  const std::size_t width = batch.max_codes;
  for (std::size_t b = 0; b < batch.batch; ++b) {
    const std::size_t len = batch.lengths[b];
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t src = b * batch.steps + (len - 1 - t);
      const std::size_t dst = b * batch.steps + t;
      out.delta_days[dst] = batch.delta_days[src];
      std::copy_n(batch.codes.begin() + static_cast<long>(src * width), width,
                  out.codes.begin() + static_cast<long>(dst * width));
      std::copy_n(batch.code_mask.begin() + static_cast<long>(src * width), width,
                  out.code_mask.begin() + static_cast<long>(dst * width));
    }
  }
  return out;
}

}  // namespace seqbench::ehr

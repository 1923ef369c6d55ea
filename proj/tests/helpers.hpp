#pragma once

#include <cmath>
#include <vector>

#include "seqbench/ehr/types.hpp"
#include "seqbench/numerics/rng.hpp"
#include "seqbench/numerics/tensor.hpp"

namespace seqbench::testing {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

/// Records with 1..max_visits visits of 1..3 codes drawn from 1..vocab-1.
inline std::vector<ehr::PatientRecord> random_records(std::size_t n, std::size_t vocab, std::size_t max_visits,
                                                      Rng& rng) {
  std::vector<ehr::PatientRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    ehr::PatientRecord r;
    r.patient_id = "P" + std::to_string(i);
    r.label = static_cast<int>(i % 2);
    const std::size_t visits = 1 + rng.below(max_visits);
    for (std::size_t v = 0; v < visits; ++v) {
      ehr::Visit visit;
      visit.delta_days = v == 0 ? 0 : static_cast<int>(1 + rng.below(120));
      const std::size_t codes = 1 + rng.below(3);
      for (std::size_t c = 0; c < codes; ++c) visit.codes.push_back(static_cast<std::int32_t>(1 + rng.below(vocab - 1)));
      r.visits.push_back(std::move(visit));
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

}  // namespace seqbench::testing

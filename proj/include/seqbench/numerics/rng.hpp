#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace seqbench {

/// Seeded pseudo-random stream.
///
/// Independent sub-streams are derived from a root seed with derive(); the
/// derivation depends only on (seed, purpose, index), never on how much of
/// the parent stream has been consumed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  Rng derive(std::string_view purpose, std::uint64_t index = 0) const;
  std::uint64_t derive_seed(std::string_view purpose, std::uint64_t index = 0) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  int poisson(double mean);
  /// Number of trials until first success, >= 1.
  int geometric(double p);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace seqbench

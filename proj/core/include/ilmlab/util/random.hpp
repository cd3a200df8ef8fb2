#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ilmlab::util {

/// Seeded generator whose derived draws are identical on every platform.
/// std::*_distribution output is implementation-defined, so uniform and
/// normal variates are derived from raw mt19937_64 bits here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  /// Inclusive integer range.
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
  double normal();
  /// Sample an index from an unnormalized non-negative weight vector.
  std::size_t categorical(const std::vector<double>& weights);
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derive an independent stream seed from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept;

}  // namespace ilmlab::util

#pragma once

#include <cstdint>
#include <random>

namespace tqr {

// Seeded random stream. All draws are derived from the raw mt19937_64 output
// with fixed arithmetic (no std::*_distribution), so sequences are identical
// across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  // independent stream for a work item (per-sample attacks, per-fold training)
  RngStream derive(std::uint64_t index) const { return RngStream(seed_ ^ index); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t raw() { return gen_(); }

  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; } // [0,1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; the spare is dropped to keep one draw == two raws, always
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n)
  std::int64_t below(std::int64_t n) { return std::int64_t(gen_() % std::uint64_t(n)); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::int64_t i = std::int64_t(v.size()) - 1; i > 0; --i)
      std::swap(v[std::size_t(i)], v[std::size_t(below(i + 1))]);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

} // namespace tqr

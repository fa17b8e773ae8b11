#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace actionslot {

// Seeded PRNG with hand-rolled distributions. std::uniform_*_distribution
// output is implementation-defined, so every draw here is spelled out to
// keep generated datasets and initial weights bit-identical across
// platforms. The engine itself (mt19937_64) is fully specified.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n), n > 0. Modulo bias is irrelevant at these ranges.
  uint64_t uniform_index(uint64_t n) { return engine_() % n; }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform_index(static_cast<uint64_t>(hi - lo + 1)));
  }

  double uniform_real() {  // [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform_real(double lo, double hi) {
    return lo + (hi - lo) * uniform_real();
  }

  // Box-Muller; one value per call (the pair's second half is discarded so
  // the draw count stays predictable).
  double normal() {
    double u1 = uniform_real();
    double u2 = uniform_real();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Derive an independent stream, e.g. per scenario or per epoch.
  Rng fork(uint64_t stream) {
    uint64_t mix = next_u64() ^ (stream * 0x9E3779B97F4A7C15ull);
    return Rng(mix);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace actionslot

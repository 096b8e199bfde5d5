#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace expo {

// Deterministic random stream with value semantics. Copying an Rng replays
// the stream; split() derives an independent substream. Gaussian draws use
// Box-Muller on top of the raw generator so results do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);

  double normal();

  void normal_fill(std::span<double> out) {
    for (double& x : out) x = normal();
  }

  Rng split(std::uint64_t tag) {
    return Rng(gen_() ^ (tag * 0x9E3779B97F4A7C15ULL));
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace expo

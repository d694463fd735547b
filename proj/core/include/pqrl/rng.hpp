#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace pqrl {

// Deterministic integer-state generator (splitmix64). All sampling in the
// project goes through this so that a (config, seed) pair replays bit-for-bit
// on every platform; the std <random> distributions are implementation-defined
// and must not be used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Index in [0, n).
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  // Fisher-Yates; deterministic given the stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stateless mixer used to derive independent substreams, e.g.
// Rng(mix(run_seed, sample_id, iteration)).
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0x1234ABCDULL) {
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b;
  z ^= z >> 29;
  z *= 0xBF58476D1CE4E5B9ULL;
  z += c * 0x94D049BB133111EBULL;
  z ^= z >> 32;
  return z;
}

}  // namespace pqrl

#pragma once

#include <cstdint>

namespace dcons::rng {

// Counter-based generator built on the SplitMix64 output function.
//
//   mix64(z):   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//               z ^= z >> 27; z *= 0x94D049BB133111EB;
//               z ^= z >> 31
//   bits(stream, k)   = mix64(stream + (k + 1) * 0x9E3779B97F4A7C15)
//   uniform(stream, k) = (bits(stream, k) >> 11) * 2^-53        in [0, 1)
//   run_stream(master, r) = mix64(master ^ mix64(r + 0x632BE59BD9B4E019))
//
// Draw k of a stream depends only on (stream, k), so any implementation of
// the formulas above reproduces the same switch sequences.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kRunSalt = 0x632BE59BD9B4E019ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) {
  return mix64(stream + (counter + 1) * kGolden);
}

constexpr double uniform(std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t run_stream(std::uint64_t master, std::uint64_t run) {
  return mix64(master ^ mix64(run + kRunSalt));
}

// Sequential view over one stream, for test-instance generation.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t seed) : seed_(seed) {}

  constexpr double uniform() { return rng::uniform(seed_, counter_++); }
  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Integer in [lo, hi].
  constexpr std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(bits(seed_, counter_++) % span);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace dcons::rng

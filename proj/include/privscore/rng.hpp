#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace privscore {

// Deterministic counter-based generator (splitmix64). Every stochastic step in
// the pipeline draws from a stream derived from (master seed, fixed tag path),
// never from shared mutable state, so results are identical regardless of
// worker count or scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Derive an independent stream; forking with distinct tags from the same
  // parent state yields decorrelated sequences.
  Rng fork(std::uint64_t tag) const {
    Rng child(0);
    child.state_ = mix(state_ ^ mix(tag + kGamma));
    return child;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  std::uint64_t state_;
};

// Stream addressed by a path of tags under a master seed.
inline Rng rng_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  Rng r(master);
  for (std::uint64_t tag : path) r = r.fork(tag);
  return r;
}

// Fixed tags for the independent stages of the pipeline.
namespace rng_tag {
inline constexpr std::uint64_t sample = 0x01;
inline constexpr std::uint64_t split = 0x02;
inline constexpr std::uint64_t tune = 0x03;
inline constexpr std::uint64_t fit = 0x04;
inline constexpr std::uint64_t bootstrap = 0x05;
inline constexpr std::uint64_t pfi = 0x06;
inline constexpr std::uint64_t shapley = 0x07;
inline constexpr std::uint64_t individual = 0x08;
inline constexpr std::uint64_t tree = 0x09;
inline constexpr std::uint64_t folds = 0x0A;
inline constexpr std::uint64_t background = 0x0B;
inline constexpr std::uint64_t iteration = 0x0C;
}  // namespace rng_tag

}  // namespace privscore

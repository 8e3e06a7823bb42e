#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace mtrl {

/**
 * Deterministic SplitMix64 stream with hierarchical substream derivation.
 *
 * Substreams are keyed by (seed, id path), so per-(episode, player) streams
 * are reproducible regardless of scheduling or evaluation order, and the
 * same seed yields byte-identical artifacts across runs and platforms.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Stream for `seed` refined by a path of ids, e.g. {episode, player}.
  static RngStream derive(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix(seed + kGamma);
    for (std::uint64_t id : path) key = mix(key ^ (id + kGamma));
    return RngStream(key);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Index sampled from an (unnormalized tolerance aside, summing to 1)
  /// probability vector by CDF inversion; zero-mass entries are never chosen.
  std::size_t categorical(std::span<const double> probs) {
    double u = next_double();
    double cum = 0.0;
    std::size_t last = 0;
    bool seen = false;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      cum += probs[i];
      last = i;
      seen = true;
      if (u < cum) return i;
    }
    return seen ? last : 0;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

}  // namespace mtrl

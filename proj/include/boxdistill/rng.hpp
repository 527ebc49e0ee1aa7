#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace boxdistill {

// Deterministic, platform-independent random stream. All stochastic pieces
// of the toolkit (init, shuffling, augmentation, synthetic rendering) draw
// from these streams so reruns with the same seeds are bit-identical.
// std::normal_distribution is implementation-defined, hence the hand-rolled
// Box-Muller on top of SplitMix64.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kInitSalt)) {}

  /// Derive an independent substream. Does not advance this stream, so the
  /// set of forked streams depends only on (seed, tag), never on call order.
  RngStream fork(std::uint64_t tag) const {
    return RngStream(mix(state_ ^ mix(tag ^ kForkSalt)));
  }
  RngStream fork(std::string_view tag) const { return fork(fnv1a(tag)); }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call, pair discarded).
  double normal() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

private:
  static constexpr std::uint64_t kInitSalt = 0x5851f42d4c957f2dULL;
  static constexpr std::uint64_t kForkSalt = 0x14057b7ef767814fULL;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace boxdistill

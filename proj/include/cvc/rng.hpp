#pragma once

#include <cmath>
#include <cstdint>

namespace cvc {

/// Counter-based pseudo-random stream: output i depends only on (key, i), so
/// substreams can be split deterministically and results do not depend on
/// evaluation order or thread count. splitmix64 finalizer as the mixer.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  /// Independent substream i of this stream.
  RngStream substream(std::uint64_t i) const {
    RngStream s(0);
    s.key_ = mix(key_ + 0xbf58476d1ce4e5b9ull * (i + 1));
    s.ctr_ = 0;
    return s;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + 0x9e3779b97f4a7c15ull * ++ctr_;
    return mix(z);
  }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  /// Standard normal via Box-Muller (no libm distribution objects, so the
  /// stream is identical across standard libraries).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586476925286766559 * u2;
    spare_ = rad * std::sin(ang);
    have_spare_ = true;
    return rad * std::cos(ang);
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cvc

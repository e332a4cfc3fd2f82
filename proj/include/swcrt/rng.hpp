#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace swcrt {

// splitmix64 finalizer, used to derive independent substream seeds from
// (seed, replicate, cluster) so parallel and serial runs draw identically.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate,
                                 std::uint64_t cluster) {
  return mix64(mix64(mix64(seed) ^ replicate) ^ cluster);
}

// Standard-normal sampler pinned to one algorithm (Box-Muller over explicit
// 53-bit uniforms from mt19937_64) so seeded runs are stable across standard
// library implementations.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * (*this)(); }

 private:
  double uniform01() {
    return (eng_() >> 11) * 0x1.0p-53;  // [0,1) with 53 random bits
  }
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace swcrt

#ifndef OMNIBUS_RNG_HPP
#define OMNIBUS_RNG_HPP

#include <cmath>
#include <cstdint>

namespace omnibus {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ engine. Plain integer arithmetic, so sequences are
/// identical across platforms and thread counts.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t z = seed;
    for (auto& word : state_) {
      z = detail::mix64(z);
      word = z;
    }
    state_[0] |= 1;  // never all-zero
  }

  std::uint64_t next() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

 private:
  std::uint64_t state_[4];
};

/// A per-replicate Gaussian stream. Each (seed, replicate) pair keys an
/// independent stream, so fan-out across workers reproduces the serial
/// sequence exactly.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t replicate_index)
      : engine_(detail::mix64(seed ^ detail::mix64(replicate_index + 0x51ed2701a7b3dd1cULL))) {}

  double uniform01() {  // in [0, 1)
    return static_cast<double>(engine_.next() >> 11) * 0x1.0p-53;
  }

  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Box-Muller; u1 kept strictly positive for the log
    const double u1 = (static_cast<double>(engine_.next() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  Xoshiro256pp engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives a per-scenario seed from a run-level seed and scenario index.
inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t index) {
  return detail::mix64(run_seed ^ detail::mix64(index + 0x9d8a7f6e5d4c3b2aULL));
}

}  // namespace omnibus

#endif  // OMNIBUS_RNG_HPP

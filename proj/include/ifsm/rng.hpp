#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace ifsm {

/// splitmix64 finalizer; used to derive substream states from (seed, stream_id).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds a path of counters (replicate, path, block, ...) into one stream id.
constexpr std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Counter-addressed random stream: a xoshiro256++ generator whose state is a
/// pure function of (seed, stream_id). Satisfies UniformRandomBitGenerator.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {
    std::uint64_t x = mix64(seed) ^ mix64(stream + 0x243f6a8885a308d3ULL);
    for (auto& s : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      s = mix64(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform01() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Child stream addressed by `id` under the same master seed.
  SeededRng substream(std::uint64_t id) const noexcept {
    return SeededRng(seed_, mix64(stream_) ^ mix64(id + 0x13198a2e03707344ULL));
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
};

/// Stateless Box-Muller N(0, 1); consumes two uniforms.
inline double standard_normal(SeededRng& rng) noexcept {
  const double r = std::sqrt(-2.0 * std::log(rng.uniform01()));
  return r * std::cos(2.0 * std::numbers::pi * rng.uniform01());
}

}  // namespace ifsm

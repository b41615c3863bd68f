#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace tbm {

/// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a path of counters, e.g.
/// deriveSeed(master, {nIndex, rhoIndex, replicate, algorithm}).
std::uint64_t deriveSeed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

/// Maps 64 random bits to a double in [0, 1) with 53 bits of resolution.
constexpr double toUnitInterval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Small sequential generator seeded from a counter-derived key. Each tensor
/// entry owns one stream keyed by (seed, flat index), so entries can be
/// sampled in any order or in parallel with identical results.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept { return toUnitInterval((*this)()); }

  /// Uniform integer in [0, bound). Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

/// Counter-based uniform for entry `index` of a stream keyed by `seed`.
constexpr double counterUniform(std::uint64_t seed, std::uint64_t index) noexcept {
  return toUnitInterval(mix64(mix64(seed) ^ (index * 0xd1b54a32d192ed03ULL)));
}

}  // namespace tbm

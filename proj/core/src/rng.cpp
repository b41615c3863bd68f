#include "tbm/rng.hpp"

namespace tbm {

namespace {
__extension__ using Uint128 = unsigned __int128;
}  // namespace

std::uint64_t deriveSeed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
  for (std::uint64_t step : path) h = mix64(h ^ mix64(step + 0x13198a2e03707344ULL));
  return h;
}

std::uint64_t SplitMix64::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  Uint128 m = static_cast<Uint128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<Uint128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace tbm

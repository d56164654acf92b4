#ifndef DOUBLETHINK_RNG_HPP
#define DOUBLETHINK_RNG_HPP

#include <cstdint>
#include <random>

namespace doublethink {

/// Independent Mersenne Twister stream for (seed, a, b). Work is split into
/// fixed chunks keyed by (a, b) so results do not depend on thread count.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b)};
  return std::mt19937_64(seq);
}

}  // namespace doublethink

#endif  // DOUBLETHINK_RNG_HPP

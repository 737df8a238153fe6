#pragma once

#include <cstdint>
#include <random>

namespace sphereproc {

/// Reproducible stream identifier: `seed` names the experiment, `stream`
/// the replicate. Distinct (seed, stream) pairs give independent engines.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngSeed with_stream(std::uint64_t s) const { return RngSeed{seed, s}; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic engine for a (seed, stream) pair.
inline std::mt19937_64 make_engine(const RngSeed& s) {
  std::uint64_t state = s.seed;
  std::uint64_t a = detail::splitmix64(state);
  state ^= 0x6a09e667f3bcc909ULL + s.stream * 0x9e3779b97f4a7c15ULL;
  std::uint64_t b = detail::splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace sphereproc

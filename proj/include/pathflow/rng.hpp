#pragma once

#include <cstdint>
#include <random>

namespace pathflow {

namespace internal {

// splitmix64 finalizer; used only to derive well-separated seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace internal

/// Seed of the random stream owned by one particle at one iteration.
///
/// Every random draw in the library comes from a generator seeded through this function,
/// so a particle's noise depends only on (seed, stream, particle) and never on the order
/// in which particles are processed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t particle) {
  return internal::mix64(internal::mix64(internal::mix64(seed) ^ stream) ^ (particle * 0xd1b54a32d192ed03ULL));
}

inline std::mt19937_64 particle_generator(std::uint64_t seed, std::uint64_t stream, std::uint64_t particle) {
  return std::mt19937_64(stream_seed(seed, stream, particle));
}

/// Stream ids reserved for non-iteration draws. Iteration streams count up from zero.
inline constexpr std::uint64_t kInitialSampleStream = 0xffff'ffff'0000'0001ULL;
inline constexpr std::uint64_t kTargetSampleStream = 0xffff'ffff'0000'0002ULL;
inline constexpr std::uint64_t kFieldInitStream = 0xffff'ffff'0000'0003ULL;
inline constexpr std::uint64_t kAuxiliaryStream = 0xffff'ffff'0000'0004ULL;

}  // namespace pathflow

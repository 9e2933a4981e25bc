#pragma once

#include <cstdint>
#include <random>

namespace stepdecay {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream-splitting rule used everywhere a child seed is needed:
///   child = splitmix64(base ^ splitmix64(stream + 1))
/// Replication r of a batch seeded with `base` uses derive_seed(base, r);
/// inside one run, stream 0 feeds the gradient oracle and stream 1 the
/// output-index sampler.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream + 1));
}

enum class RunStream : std::uint64_t { Oracle = 0, OutputSampler = 1 };

inline Rng make_rng(std::uint64_t run_seed, RunStream stream) {
  return Rng(derive_seed(run_seed, static_cast<std::uint64_t>(stream)));
}

/// Uniform double in [0, 1) using the top 53 bits of one engine call.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace stepdecay

#pragma once

#include <cstdint>
#include <random>

namespace tadam {

/// All experiment randomness flows through mt19937_64, whose output sequence is
/// fixed by the C++ standard; distributions come from Boost.Random, whose
/// algorithms do not vary between standard library vendors.
using Engine = std::mt19937_64;

/// Independent streams derived from one experiment seed. Keeping these separate
/// lets, e.g., the corruption mask stay fixed while the noise scale changes.
enum class Stream : std::uint64_t {
  Inputs = 1,
  CorruptionMask = 2,
  NoiseMagnitude = 3,
  Init = 4,
  Shuffle = 5,
  Gradients = 6,
  Targets = 7,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Engine for (seed, stream); distinct pairs give decorrelated seeds.
Engine make_stream(std::uint64_t seed, Stream stream);

/// Uniform double in [0, 1).
double uniform01(Engine& engine);
double standard_normal(Engine& engine);
/// Uniform integer in [0, bound).
std::uint64_t uniform_index(Engine& engine, std::uint64_t bound);

}  // namespace tadam

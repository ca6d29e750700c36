#pragma once

// Seed expansion: one root seed feeds every random stream through a counter scheme,
//   seed(root, stream, index) = splitmix64(splitmix64(root ^ golden*stream) + index),
// so parallel jobs draw from independent, reproducible generators.

#include <cstdint>

namespace misfit {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t {
  TetraFit = 1,
  TetraValidate = 2,
  OctaFit = 3,
  OctaValidate = 4,
  Multistart = 5,
  Rotations = 6,
  Convexity = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t root, SeedStream stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(stream))) + index);
}

}  // namespace misfit

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mhs {

using Rng = std::mt19937_64;

/// Independent stream keyed by (seed, name, index). Streams for channel draws,
/// session arrivals and profile synthesis never share state, so adding a policy
/// variant does not perturb the environment.
inline Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace mhs

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace iabsim {

using RngStream = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Purpose tags for seed derivation. Values are part of the reproducibility
/// contract: changing one changes every stream derived from it.
enum class StreamTag : std::uint64_t {
  kScenario = 0x5C,
  kFading = 0xFA,
  kShuffle = 0x5F,
};

/**
 * \brief Derives an independent sub-seed from a master seed and a path of
 * integers (trial index, purpose tag, CSI instant, link ids, ...).
 *
 * h0 = mix64(master); h_{k+1} = mix64(h_k ^ mix64(path_k + k + 1)).
 * Distinct paths give statistically independent mt19937_64 streams and the
 * result does not depend on the order in which streams are requested.
 */
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  std::uint64_t k = 0;
  for (std::uint64_t p : path) {
    h = mix64(h ^ mix64(p + (++k)));
  }
  return h;
}

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace iabsim

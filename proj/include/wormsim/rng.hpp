#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

// Random number plumbing.
//
// Sequential draws (initial positions, headings, speeds) come from
// std::mt19937_64, whose output sequence is fixed by the C++ standard.
// Per-event draws (transmission trials, recoveries) are counter-based: each
// is a pure function of (seed, stream tag, event coordinates) built from the
// SplitMix64 finalizer, so outcomes do not depend on the order in which the
// simulation happens to visit pairs.
namespace wormsim::rng {

/// SplitMix64 output finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Top 53 bits mapped onto [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seed for run `index` of an ensemble rooted at `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base + kGolden) ^ mix64((index + 1) * kGolden));
}

enum class Stream : std::uint64_t {
  EntryTrial = 1,
  OnsetTrial = 2,
  Recovery = 3,
  ChordProbe = 4,
};

/// Keyed hash of event coordinates onto [0, 1).
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : key_(mix64(seed ^ 0x5eed5eed5eedULL)) {}

  constexpr double uniform(Stream stream, std::initializer_list<std::uint64_t> coords) const {
    std::uint64_t h = mix64(key_ + static_cast<std::uint64_t>(stream) * kGolden);
    for (std::uint64_t c : coords) h = mix64(h ^ (c + kGolden));
    return to_unit(h);
  }

 private:
  std::uint64_t key_;
};

using Engine = std::mt19937_64;

inline double uniform01(Engine& engine) { return to_unit(engine()); }

}  // namespace wormsim::rng

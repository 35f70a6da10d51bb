#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rss {

/// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed of substream `index` of `master`, optionally salted by a purpose tag
/// so that e.g. circuit and noise draws of the same shot never share a stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::string_view salt = {});

/// FNV-1a 64-bit; stable content digest for headers and configs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Seeded random stream. Conversions to floating point are done here rather
/// than by <random> distributions so that streams are identical on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace rss

#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace mfi {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a, used to key sub-streams by string labels.
constexpr std::uint64_t hash_label(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based random stream. Draw j of a stream with key k is
/// mix64(k + j * golden), so any sub-stream can be reconstructed from its key
/// alone and results do not depend on the order in which trials run.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into the <random>
/// distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t key) noexcept : key_(key) {}

  static RngStream from_seed(std::uint64_t seed) noexcept {
    return RngStream(mix64(seed ^ 0x6a09e667f3bcc909ULL));
  }

  /// Independent child stream; children with distinct indices do not overlap
  /// in practice.
  RngStream substream(std::uint64_t index) const noexcept {
    return RngStream(mix64(key_ ^ mix64(index + 0x3c6ef372fe94f82bULL)));
  }

  std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mfi

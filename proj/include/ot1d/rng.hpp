#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "ot1d/numeric.hpp"

namespace ot1d {

namespace detail {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// Generation tag folded into every derived experiment substream. Bumping it
/// reshuffles the whole deterministic stream layout at once; the value
/// itself is arbitrary.
inline constexpr std::uint64_t kStreamEpoch = 22;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

} // namespace detail

/// Counter-based deterministic random stream (SplitMix64). Streams built from
/// distinct keys are statistically independent, so every experiment derives
/// one stream per (experiment id, n, replicate) and results do not depend on
/// evaluation order.
class RngStream {
public:
  explicit RngStream(std::uint64_t key)
      : state_(detail::mix64(key ^ detail::kGoldenGamma)) {}

  std::uint64_t next_u64() {
    state_ += detail::kGoldenGamma;
    return detail::mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (a, b).
  double next_uniform(double a, double b) { return a + (b - a) * next_double(); }

  /// Standard normal via the inverse-CDF transform (one uniform per draw).
  double next_gaussian() { return normal_quantile(next_double()); }

  /// Integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
  std::uint64_t state_;
};

/// Derives a stream key from a list of 64-bit words.
inline std::uint64_t stream_key(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x243F6A8885A308D3ull;
  for (std::uint64_t w : words) {
    h = detail::mix64(h ^ w) + detail::kGoldenGamma;
  }
  return detail::mix64(h);
}

/// FNV-1a hash for naming substreams after experiment labels.
inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

} // namespace ot1d

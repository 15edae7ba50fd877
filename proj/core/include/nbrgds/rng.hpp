#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace nbrgds {

/// Deterministic, splittable random stream.
///
/// A stream is identified by `(seed, stream_id)`; the same pair always
/// yields the same sequence. Child streams derived with `split(key)` depend
/// only on the parent identity and the key, never on how many values the
/// parent has produced, so work items can draw from their own stream in any
/// order or on any thread and still reproduce bit-identical results.
///
/// The generator core is xoshiro256** seeded through SplitMix64.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); never returns 0, safe for logarithms.
  double uniform_positive();
  /// Standard normal draw.
  double normal();
  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Child stream keyed by an integer.
  [[nodiscard]] RngStream split(std::uint64_t key) const;
  /// Child stream keyed by a name (hashed with FNV-1a).
  [[nodiscard]] RngStream split(std::string_view name) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> s_{};
};

/// SplitMix64 finalizer; exposed for stream-id derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace nbrgds

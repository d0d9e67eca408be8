#ifndef TWINBOOT_RNG_HPP
#define TWINBOOT_RNG_HPP

#include <cstdint>

namespace twinboot {

// Well-known stream ids. Every consumer of randomness owns a named stream so
// that changing one part of a run never shifts the draws seen by another.
namespace streams {
inline constexpr std::uint64_t bootstrap_twin1 = 1;
inline constexpr std::uint64_t bootstrap_twin2 = 2;
inline constexpr std::uint64_t shuffle_twin1 = 3;
inline constexpr std::uint64_t shuffle_twin2 = 4;
inline constexpr std::uint64_t forward_twin1 = 5;
inline constexpr std::uint64_t forward_twin2 = 6;
inline constexpr std::uint64_t reset_twin1 = 7;
inline constexpr std::uint64_t reset_twin2 = 8;
inline constexpr std::uint64_t data_noise = 9;
inline constexpr std::uint64_t param_init = 10;
inline constexpr std::uint64_t mc_inference = 11;
inline constexpr std::uint64_t problem_field = 12;
inline constexpr std::uint64_t problem_kernels = 13;
inline constexpr std::uint64_t split = 14;
}  // namespace streams

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Ziggurat tables for the standard normal, 128 layers (Marsaglia & Tsang),
// scaled for 54-bit signed integers so accepted draws have full double
// resolution within each layer.
struct ZigguratTables {
  double w[128];  // x_i / 2^53
  double f[128];  // exp(-x_i^2 / 2)
  double k[128];  // layer acceptance thresholds, in units of hz
  ZigguratTables();
};

extern const ZigguratTables zig_tables;

}  // namespace detail

/// Deterministic pseudo-random stream. A stream is fully identified by
/// (seed, stream_id): the n-th draw is the same in every process, on every
/// run. Distinct stream ids give statistically independent sequences.
/// Single-owner: one logical thread of execution per stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    state_ = detail::mix64(detail::mix64(seed ^ detail::kGolden) +
                           stream_id * detail::kGolden);
  }

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (ziggurat). Deterministic given the stream
  /// position; one call may consume more than one underlying word.
  double normal() {
    const std::uint64_t u = next_u64();
    const int iz = static_cast<int>(u & 127);
    // signed 54-bit value in [-2^53, 2^53)
    const std::int64_t hz =
        static_cast<std::int64_t>(u >> 10) - 9007199254740992LL;
    const double ahz = static_cast<double>(hz < 0 ? -hz : hz);
    if (ahz < detail::zig_tables.k[iz]) {
      return static_cast<double>(hz) * detail::zig_tables.w[iz];
    }
    return normal_slow(hz, iz);
  }

  /// Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  double normal_slow(std::int64_t hz, int iz);  // wedge/tail cases

  std::uint64_t state_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

}  // namespace twinboot

#endif

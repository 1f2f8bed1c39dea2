#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace imtm {

/// xoshiro256** generator with one jump-ahead substream per stream id.
///
/// The base state is expanded from the seed with SplitMix64 and then advanced
/// by `stream_id` jumps of 2^128 draws, so streams never overlap in practice
/// and can be owned by different threads without shared state.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1); safe as a log argument.
  double uniform_open();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma with the given shape and scale (mean shape * scale).
  double gamma(double shape, double scale);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Advances the state by 2^128 draws.
  void jump();

 private:
  std::array<std::uint64_t, 4> state_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

/// Mixes a seed and an index into a new seed (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace imtm

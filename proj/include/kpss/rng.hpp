#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace kpss {

/// Philox4x32-10 block function. Pure: the same (counter, key) always maps
/// to the same four output words.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// A seeded, splittable random stream backed by Philox4x32-10.
///
/// The 64-bit seed is the Philox key and the 64-bit stream id fills the upper
/// half of the 128-bit counter, so streams with distinct ids never overlap.
/// A stream is owned by one chain at a time; it may be moved between threads
/// but must not be shared concurrently.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); exact zeros are rejected.
  double uniform_open();
  double normal();

  /// Child stream whose id is a hash of this stream's id and `child`.
  [[nodiscard]] RngStream split(std::uint64_t child) const;

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace kpss

#ifndef LHSJA_RANDOM_HPP
#define LHSJA_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <limits>

#include "lhsja/vector.hpp"

namespace lhsja {

struct RngSeed {
  std::uint64_t value = 0;
};

/// Counter-based random stream: draw i is a pure function of (key, i).
/// Each attack run owns its stream; there is no global generator state.
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(RngSeed seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() noexcept;
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream, deterministic in (this stream's key, tag).
  /// Does not advance this stream.
  RngStream fork(std::uint64_t tag) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Gaussian sample normalized to unit l2 norm (uniform on the sphere).
Vector sample_unit_sphere(std::size_t dim, RngStream& rng);

/// Vector of i.i.d. standard normals.
Vector sample_gaussian(std::size_t dim, RngStream& rng);

}  // namespace lhsja

#endif  // LHSJA_RANDOM_HPP

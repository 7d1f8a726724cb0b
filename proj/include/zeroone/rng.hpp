#pragma once

// Counter-based random numbers: Philox4x32-10. A draw is a pure function of
// (key, counter), so any path can be regenerated independently of the order
// in which paths are simulated.

#include <array>
#include <cstdint>

namespace zeroone::mc {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Standard normals for one stream (path) under one seed; draw k is
/// determined by (seed, stream, k) alone.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  /// The k-th normal of the stream. Sequential access costs one Philox block
  /// per two draws.
  double operator()(std::uint64_t k);

 private:
  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t cached_block_ = ~std::uint64_t{0};
  double cached_[2] = {0.0, 0.0};
};

/// Uniform in (0, 1) from 64 random bits; never returns 0 or 1.
double to_open_unit(std::uint64_t bits);

}  // namespace zeroone::mc

#include "zeroone/rng.hpp"

#include <cmath>

namespace zeroone::mc {

namespace {
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}
}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double to_open_unit(std::uint64_t bits) {
  // 53 significant bits, offset by half an ulp to exclude both ends.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

double NormalStream::operator()(std::uint64_t k) {
  const std::uint64_t block = k >> 1;
  if (block != cached_block_) {
    const PhiloxCounter out = philox4x32_10({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                                             static_cast<std::uint32_t>(stream_),
                                             static_cast<std::uint32_t>(stream_ >> 32)},
                                            key_);
    const double u1 = to_open_unit((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
    const double u2 = to_open_unit((static_cast<std::uint64_t>(out[3]) << 32) | out[2]);
    // Box-Muller.
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    cached_[0] = rad * std::cos(ang);
    cached_[1] = rad * std::sin(ang);
    cached_block_ = block;
  }
  return cached_[k & 1];
}

}  // namespace zeroone::mc

#pragma once
// Counter-based random source: Philox4x32-10 plus a Box-Muller normal layer.
//
// Streams are keyed by (seed, stream id), so replication r of experiment cell c
// can draw from its own stream no matter which worker thread runs it. Every
// draw is a pure function of (seed, stream, draw index); there is no shared
// mutable generator state and results are bit-identical for any thread count.

#include <array>
#include <cmath>
#include <cstdint>

namespace gpsde {

namespace detail {

inline void philox_round(std::array<uint32_t, 4>& ctr, const std::array<uint32_t, 2>& key) {
  constexpr uint64_t M0 = 0xD2511F53u;
  constexpr uint64_t M1 = 0xCD9E8D57u;
  const uint64_t p0 = M0 * ctr[0];
  const uint64_t p1 = M1 * ctr[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

// One 10-round Philox4x32 block: 128 counter bits, 64 key bits -> 128 output bits.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
  constexpr uint32_t W0 = 0x9E3779B9u;
  constexpr uint32_t W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(ctr, key);
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        stream_lo_(static_cast<uint32_t>(stream)),
        stream_hi_(static_cast<uint32_t>(stream >> 32)) {}

  uint64_t next_u64() {
    if (word_ >= 4) refill();
    const uint64_t lo = block_[word_++];
    const uint64_t hi = block_[word_++];
    return lo | (hi << 32);
  }

  // Uniform on (0,1]: strictly positive so it is safe under log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.283185307179586477;
    const double u1 = uniform_pos();
    const double u2 = (static_cast<double>(next_u64() >> 11)) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = two_pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  void refill() {
    block_ = philox4x32({static_cast<uint32_t>(block_idx_),
                         static_cast<uint32_t>(block_idx_ >> 32), stream_lo_, stream_hi_},
                        key_);
    ++block_idx_;
    word_ = 0;
  }

  std::array<uint32_t, 2> key_;
  uint32_t stream_lo_, stream_hi_;
  uint64_t block_idx_ = 0;
  std::array<uint32_t, 4> block_{};
  int word_ = 4;  // forces refill on first draw
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gpsde

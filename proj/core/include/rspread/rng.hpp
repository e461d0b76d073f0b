#pragma once

#include <array>
#include <cstdint>

namespace rspread {

/// Counter-based Philox4x64 generator (10 rounds).
///
/// Each (seed, stream) pair keys an independent deterministic sequence, so
/// replicas can derive their own stream from a base seed without any shared
/// state. Output is identical across platforms and thread schedules, which is
/// what makes byte-reproducible experiment runs possible.
///
/// The block function matches numpy.random.Philox (same multipliers and Weyl
/// constants); test vectors in the unit tests were cross-checked against it.
class PhiloxStream {
public:
  explicit PhiloxStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{seed, stream} {}

  static std::array<std::uint64_t, 4> block(
      const std::array<std::uint64_t, 4>& counter,
      const std::array<std::uint64_t, 2>& key) {
    std::uint64_t c0 = counter[0], c1 = counter[1];
    std::uint64_t c2 = counter[2], c3 = counter[3];
    std::uint64_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      if (round != 0) {
        k0 += 0x9E3779B97F4A7C15ULL;
        k1 += 0xBB67AE8584CAA73BULL;
      }
      std::uint64_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2E7470EE14C6C93ULL, c0, hi0, lo0);
      mulhilo(0xCA5A826395121157ULL, c2, hi1, lo1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
    }
    return {c0, c1, c2, c3};
  }

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buffer_ = block(counter_, key_);
      if (++counter_[0] == 0) ++counter_[1];
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

private:
  static void mulhilo(std::uint64_t a, std::uint64_t b,
                      std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 product =
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
    hi = static_cast<std::uint64_t>(product >> 64);
    lo = static_cast<std::uint64_t>(product);
  }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_{0, 0, 0, 0};
  std::array<std::uint64_t, 4> buffer_{};
  unsigned pos_ = 4;
};

/// Stream identifiers keeping the independent random-number uses of one seed
/// from colliding.
namespace rng_stream {
inline constexpr std::uint64_t population_draw = 1;
inline constexpr std::uint64_t infection_order = 2;
inline constexpr std::uint64_t instance_generation = 3;
}  // namespace rng_stream

}  // namespace rspread

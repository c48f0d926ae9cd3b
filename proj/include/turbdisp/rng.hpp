#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al. 2011).
//
// A stream is identified by a master seed plus a path of integers such as
// (experiment, realization, role). The path is hashed into the Philox key and
// the upper counter words, so every stream is reproducible on its own and
// independent of the order in which workers visit them.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>

namespace turbdisp {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block generate(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = round_fn(ctr, key);
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static constexpr Block round_fn(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
  }
};

/// Sequential draws from one Philox stream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = detail::splitmix64(seed);
    for (std::uint64_t v : path) h = detail::splitmix64(h ^ detail::splitmix64(v));
    const std::uint64_t h2 = detail::splitmix64(h ^ 0x5851F42D4C957F2DULL);
    key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    hi_ = h2;
  }

  /// Four fresh 32-bit words.
  Philox4x32::Block next_block() noexcept {
    const Philox4x32::Block ctr = {static_cast<std::uint32_t>(block_),
                                   static_cast<std::uint32_t>(block_ >> 32),
                                   static_cast<std::uint32_t>(hi_),
                                   static_cast<std::uint32_t>(hi_ >> 32)};
    ++block_;
    return Philox4x32::generate(ctr, key_);
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() noexcept {
    if (cached_u_) {
      cached_u_ = false;
      return u_cache_;
    }
    const auto b = next_block();
    u_cache_ = to_unit(b[2], b[3]);
    cached_u_ = true;
    return to_unit(b[0], b[1]);
  }

  /// Standard normal by Box-Muller; draws come in pairs.
  double normal() noexcept {
    if (cached_n_) {
      cached_n_ = false;
      return n_cache_;
    }
    double z0, z1;
    normal_pair(z0, z1);
    n_cache_ = z1;
    cached_n_ = true;
    return z0;
  }

  void fill_normal(std::span<double> out) noexcept {
    std::size_t i = 0;
    for (; i + 1 < out.size(); i += 2) normal_pair(out[i], out[i + 1]);
    if (i < out.size()) out[i] = normal();
  }

  std::uint64_t blocks_consumed() const noexcept { return block_; }

  /// Repositions the counter and drops cached draws.
  void seek(std::uint64_t block) noexcept {
    block_ = block;
    cached_u_ = cached_n_ = false;
  }

 private:
  static double to_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
    const std::uint64_t bits =
        ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  void normal_pair(double& z0, double& z1) noexcept {
    const auto b = next_block();
    const double u1 = to_unit(b[0], b[1]);
    const double u2 = to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(th);
    z1 = r * std::sin(th);
  }

  Philox4x32::Key key_{};
  std::uint64_t hi_ = 0;
  std::uint64_t block_ = 0;
  double u_cache_ = 0.0;
  double n_cache_ = 0.0;
  bool cached_u_ = false;
  bool cached_n_ = false;
};

/// Stream roles used when deriving sub-streams from one master seed.
enum class StreamRole : std::uint64_t {
  Field = 1,
  Brownian = 2,
  Placement = 3,
  Limit = 4,
  Scalar = 5,
  Permutation = 6,
  Start = 7,
};

}  // namespace turbdisp

// Copyright 2026 The DPPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Counter-based random numbers for reproducible mechanisms.
//
// The generator is Philox4x32-10 (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). A stream is identified by (seed, stream id): the seed
// is the Philox key and the stream id occupies the upper half of the 128-bit
// counter, the lower half counts blocks. Output depends only on integer
// arithmetic, so a given (seed, stream) yields the same bits everywhere.
//
// Floating-point transforms:
//   Uniform()      53 high bits of a 64-bit word, scaled by 2^-53, in [0, 1).
//   OpenUniform()  (bits + 0.5) * 2^-53, in (0, 1).
//   Normal()       Box-Muller on two OpenUniform() draws; both outputs of a
//                  pair are used, cosine branch first.

#ifndef DPPL_RNG_HPP_
#define DPPL_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace dppl {

// Seed plus stream id. Identical states produce identical draw sequences.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const RngState&, const RngState&) = default;
};

namespace internal {

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace internal

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// One Philox4x32-10 block.
inline PhiloxCounter Philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

// Derives a child stream id from a parent stream and a tag (for example a
// class id). Distinct tags give statistically independent streams.
inline std::uint64_t DeriveStream(std::uint64_t parent, std::uint64_t tag) {
  return internal::SplitMix64(internal::SplitMix64(parent) ^
                              (tag * 0xD1B54A32D192ED03ULL + 1));
}

inline RngState DeriveState(const RngState& parent, std::uint64_t tag) {
  return {parent.seed, DeriveStream(parent.stream, tag)};
}

class Rng {
 public:
  explicit Rng(RngState state) : state_(state) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : Rng(RngState{seed, stream}) {}

  const RngState& state() const { return state_; }

  std::uint64_t NextU64() {
    if (lane_ == 2) Refill();
    const std::uint64_t lo = buffer_[2 * lane_];
    const std::uint64_t hi = buffer_[2 * lane_ + 1];
    ++lane_;
    return (hi << 32) | lo;
  }

  double Uniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  double OpenUniform() {
    return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = OpenUniform();
    const double u2 = OpenUniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Standard Gumbel draw: -log(-log(U)), U in (0, 1).
  double Gumbel() { return -std::log(-std::log(OpenUniform())); }

  // Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t UniformInt(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = NextU64();
      const __uint128_t m = static_cast<__uint128_t>(x) * bound;
      if (static_cast<std::uint64_t>(m) >= limit) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

 private:
  void Refill() {
    const PhiloxCounter ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(state_.stream),
        static_cast<std::uint32_t>(state_.stream >> 32)};
    const PhiloxKey key = {static_cast<std::uint32_t>(state_.seed),
                           static_cast<std::uint32_t>(state_.seed >> 32)};
    buffer_ = Philox4x32(ctr, key);
    ++block_;
    lane_ = 0;
  }

  RngState state_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int lane_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dppl

#endif  // DPPL_RNG_HPP_

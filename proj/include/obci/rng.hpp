#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace obci {

// Identifies one reproducible random stream. Replication r of any Monte Carlo
// loop uses stream_index = r so results do not depend on scheduling.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  SeedSpec substream(std::uint64_t index) const { return {master_seed, index}; }
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Key = master seed, counter = (block, stream). Satisfies
// UniformRandomBitGenerator with 64-bit output so it can drive the Boost
// distributions, whose algorithms are fixed across platforms.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;

  Philox4x32() : Philox4x32(SeedSpec{}) {}
  explicit Philox4x32(SeedSpec seed) { reseed(seed); }

  void reseed(SeedSpec seed) {
    key_ = {static_cast<std::uint32_t>(seed.master_seed),
            static_cast<std::uint32_t>(seed.master_seed >> 32)};
    stream_ = seed.stream_index;
    block_ = 0;
    pos_ = 2;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) refill();
    return out_[pos_++];
  }

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform01() {
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>((*this)() >> 11) + 0.5) * scale;
  }

  std::uint64_t block() const { return block_; }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    out_[0] = (static_cast<std::uint64_t>(ctr[1]) << 32) | ctr[0];
    out_[1] = (static_cast<std::uint64_t>(ctr[3]) << 32) | ctr[2];
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> out_{};
  int pos_ = 2;
};

}  // namespace obci

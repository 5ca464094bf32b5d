#ifndef DEEPCAL_RNG_H_
#define DEEPCAL_RNG_H_

#include <array>
#include <cstdint>

namespace deepcal {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Output is a
// pure function of (key, counter), so any block of any stream can be
// produced independently of every other block.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter Generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Maps 64 random bits to a double strictly inside (0, 1).
inline double BitsToOpenUnit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Sequential view of the uniform stream keyed by (seed, stream_id). Draw k of
// the stream is identical no matter how many draws were taken before it in
// other streams, which is what makes path simulation thread-count independent.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream_id)),
        stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  double Next() {
    if (pos_ == 2) Refill();
    return buffer_[pos_++];
  }

  // Uniform number `index` of this stream without disturbing the cursor.
  double At(std::uint64_t index) const {
    const auto out = Block(index / 2);
    return index % 2 == 0 ? Combine(out[0], out[1]) : Combine(out[2], out[3]);
  }

 private:
  Philox4x32::Counter Block(std::uint64_t block) const {
    return Philox4x32::Generate(
        {stream_lo_, stream_hi_, static_cast<std::uint32_t>(block),
         static_cast<std::uint32_t>(block >> 32)},
        key_);
  }

  static double Combine(std::uint32_t hi, std::uint32_t lo) {
    return BitsToOpenUnit((std::uint64_t{hi} << 32) | lo);
  }

  void Refill() {
    const auto out = Block(block_++);
    buffer_[0] = Combine(out[0], out[1]);
    buffer_[1] = Combine(out[2], out[3]);
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  std::array<double, 2> buffer_{};
  int pos_ = 2;
};

// Purposes for which a sub-seed is split off the single top-level seed.
enum class SeedPurpose : std::uint64_t {
  kMonteCarloPaths = 1,
  kWeightInit = 2,
  kCalibrationStarts = 3,
};

// Sub-seed = SplitMix64(seed + golden * purpose). Documented in README.
inline std::uint64_t DeriveSeed(std::uint64_t seed, SeedPurpose purpose) {
  std::uint64_t z =
      seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(purpose);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace deepcal

#endif  // DEEPCAL_RNG_H_

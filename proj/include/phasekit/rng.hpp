#pragma once

#include <array>
#include <cstdint>

namespace phasekit {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key; the 64-bit stream id fills the upper half of
/// the 128-bit counter and the lower half counts blocks. Distinct
/// (seed, stream) pairs give independent sequences without shared state.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  /// Raw bijection: ten rounds of the Philox S-box on one counter block.
  static Block encrypt(Block counter, Key key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  void refill();

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

}  // namespace phasekit

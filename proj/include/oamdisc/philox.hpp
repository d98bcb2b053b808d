#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace oamdisc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed forms the key; the 128-bit counter is (block, tag, stream_lo, stream_hi).
/// Each (seed, tag, stream) triple names an independent sequence of 2^32 four-word blocks.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t seed, std::uint32_t tag, std::uint64_t stream);

  static Block bijection(Block counter, std::array<std::uint32_t, 2> key);

  std::uint32_t next_u32();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();

 private:
  std::array<std::uint32_t, 2> key_;
  Block counter_;
  Block buffer_{};
  int used_ = 4;
};

/// Poisson variate: multiplication method for small means, transformed rejection (PTRS) otherwise.
long long poisson(Philox4x32& rng, double mean);

/// Sampling table for a categorical distribution whose probabilities may sum to less than one;
/// the deficit maps to the `lost` index (size()).
class CategoricalTable {
 public:
  explicit CategoricalTable(std::span<const double> prob);

  std::size_t size() const { return cdf_.size(); }
  /// Cell index in [0, size()], where size() denotes a lost draw.
  std::size_t draw(Philox4x32& rng) const;
  double total() const { return total_; }

 private:
  std::vector<double> cdf_;
  double total_;
};

}  // namespace oamdisc

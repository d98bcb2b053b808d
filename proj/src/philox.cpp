#include "oamdisc/philox.hpp"

#include <algorithm>
#include <cmath>

#include "oamdisc/errors.hpp"

namespace oamdisc {

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

Philox4x32::Philox4x32(std::uint64_t seed, std::uint32_t tag, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, tag, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

Philox4x32::Block Philox4x32::bijection(Block c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

std::uint32_t Philox4x32::next_u32() {
  if (used_ == 4) {
    buffer_ = bijection(counter_, key_);
    if (++counter_[0] == 0) throw DomainError("random stream exhausted");
    used_ = 0;
  }
  return buffer_[used_++];
}

double Philox4x32::uniform() {
  const std::uint64_t a = next_u32() >> 5;
  const std::uint64_t b = next_u32() >> 6;
  return static_cast<double>((a << 26) | b) * 0x1.0p-53;
}

double Philox4x32::uniform_open() { return uniform() + 0x1.0p-54; }

long long poisson(Philox4x32& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be finite and non-negative");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    double prod = rng.uniform_open();
    long long k = 0;
    while (prod > limit) {
      prod *= rng.uniform_open();
      ++k;
    }
    return k;
  }
  // Hormann (1993), transformed rejection with squeeze.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + kf * loglam - std::lgamma(kf + 1.0)) {
      return static_cast<long long>(kf);
    }
  }
}

CategoricalTable::CategoricalTable(std::span<const double> prob) : cdf_(prob.size()) {
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!(prob[i] >= 0.0) || !std::isfinite(prob[i])) throw DomainError("probabilities must be finite and non-negative");
    acc += prob[i];
    cdf_[i] = acc;
  }
  if (acc > 1.0 + 1e-9) throw DomainError("probabilities sum to more than one");
  total_ = acc;
}

std::size_t CategoricalTable::draw(Philox4x32& rng) const {
  const double u = rng.uniform();
  return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

}  // namespace oamdisc

#pragma once

#include <complex>
#include <span>

namespace oamdisc::fft {

/// Unnormalized in-place DFT. Forward uses exp(-2 pi i jk / n), inverse exp(+2 pi i jk / n).
void forward(std::span<std::complex<double>> data);
void inverse(std::span<std::complex<double>> data);

/// Row-major n x n in-place 2D transforms, same conventions.
void forward_2d(std::span<std::complex<double>> data, int n);
void inverse_2d(std::span<std::complex<double>> data, int n);

}  // namespace oamdisc::fft

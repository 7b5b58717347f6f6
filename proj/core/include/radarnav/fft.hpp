#pragma once

#include <complex>
#include <span>

namespace radarnav::fft {

/// In-place unnormalized forward DFT, X[k] = sum_n x[n] exp(-2 pi i k n / N).
/// Safe to call concurrently.
void forward(std::span<std::complex<double>> data);

/// Swaps halves so that the zero-frequency bin lands at index size / 2.
void shift(std::span<std::complex<double>> data);

}  // namespace radarnav::fft

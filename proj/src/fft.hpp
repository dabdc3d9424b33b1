#pragma once

#include <complex>
#include <span>
#include <vector>

namespace seisnoise::detail {

/// Real-to-complex DFT: returns n/2 + 1 coefficients (unnormalized).
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft for a series of length n (normalized so irfft(rfft(x)) == x).
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

}  // namespace seisnoise::detail

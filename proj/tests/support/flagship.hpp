#pragma once

// Published ANMO dataset-1 model: ARIMA(5,2,3) with N(0, 44.91) innovations and
// GARCH(1,1) sigma2[k] = 0.31 + 0.98 sigma2[k-1] + 0.019 e[k-1]^2.
// Coefficients are mapped to 1 - sum phi_i q^-i and 1 + sum theta_j q^-j.

#include <vector>

namespace testsupport::flagship {

inline const std::vector<double> phi{1.29, -0.39, -0.17, 0.29, -0.24};
inline const std::vector<double> theta{-0.54, -0.62, 0.63};
inline constexpr int d = 2;
inline constexpr double innovation_variance = 44.91;
inline constexpr double c0 = 0.31;
inline constexpr double arch_b1 = 0.019;
inline constexpr double garch_a1 = 0.98;

}  // namespace testsupport::flagship

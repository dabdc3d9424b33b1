#pragma once

// Brute-force Grassberger-Procaccia correlation sum, used only as a test oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace testsupport {

/// Max-norm correlation sums C(r) over all pairs (i, j) with |i - j| > theiler,
/// for the first n_points delay vectors.
inline std::vector<double> correlation_sums(const std::vector<double>& x, int m, int tau, int theiler,
                                            std::size_t n_points, const std::vector<double>& radii) {
    std::vector<double> dists;
    dists.reserve(n_points * n_points / 2);
    for (std::size_t i = 0; i < n_points; ++i) {
        for (std::size_t j = i + static_cast<std::size_t>(theiler) + 1; j < n_points; ++j) {
            double d = 0.0;
            for (int k = 0; k < m; ++k) {
                d = std::max(d, std::abs(x[i + static_cast<std::size_t>(k * tau)] - x[j + static_cast<std::size_t>(k * tau)]));
            }
            dists.push_back(d);
        }
    }
    std::sort(dists.begin(), dists.end());
    std::vector<double> c;
    for (double r : radii) {
        const auto count = std::upper_bound(dists.begin(), dists.end(), r) - dists.begin();
        c.push_back(static_cast<double>(count) / static_cast<double>(dists.size()));
    }
    return c;
}

/// Distance quantile q over the same pair set (used to place the fit band).
inline double pair_distance_quantile(const std::vector<double>& x, int m, int tau, int theiler, std::size_t n_points,
                                     double q) {
    std::vector<double> dists;
    for (std::size_t i = 0; i < n_points; ++i) {
        for (std::size_t j = i + static_cast<std::size_t>(theiler) + 1; j < n_points; ++j) {
            double d = 0.0;
            for (int k = 0; k < m; ++k) {
                d = std::max(d, std::abs(x[i + static_cast<std::size_t>(k * tau)] - x[j + static_cast<std::size_t>(k * tau)]));
            }
            dists.push_back(d);
        }
    }
    const auto k = static_cast<std::size_t>(q * static_cast<double>(dists.size() - 1));
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k), dists.end());
    return dists[k];
}

/// Least-squares slope of log C vs log r on log-spaced radii between the band quantiles.
inline double gp_slope(const std::vector<double>& x, int m, int tau, int theiler, std::size_t n_points,
                       double c_low, double c_high) {
    const double r_lo = pair_distance_quantile(x, m, tau, theiler, n_points, c_low);
    const double r_hi = pair_distance_quantile(x, m, tau, theiler, n_points, c_high);
    std::vector<double> radii;
    for (int k = 0; k <= 20; ++k) radii.push_back(r_lo * std::pow(r_hi / r_lo, k / 20.0));
    const auto c = correlation_sums(x, m, tau, theiler, n_points, radii);
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        mx += std::log(radii[k]);
        my += std::log(c[k]);
    }
    mx /= static_cast<double>(radii.size());
    my /= static_cast<double>(radii.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        sxy += (std::log(radii[k]) - mx) * (std::log(c[k]) - my);
        sxx += (std::log(radii[k]) - mx) * (std::log(radii[k]) - mx);
    }
    return sxy / sxx;
}

}  // namespace testsupport

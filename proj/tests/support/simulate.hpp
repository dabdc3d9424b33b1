#pragma once

// Test-only generators written directly from the defining recursions, kept
// independent of the library's simulators so they can serve as oracles.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

inline std::vector<double> gwn(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = dist(rng);
    return x;
}

inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, std::size_t burn = 1000) {
    const auto e = gwn(n + burn, seed);
    std::vector<double> x(n + burn, 0.0);
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = phi * x[t - 1] + e[t];
    return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

inline std::vector<double> ma1(std::size_t n, double theta, std::uint64_t seed) {
    const auto e = gwn(n + 1, seed);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = e[t + 1] + theta * e[t];
    return x;
}

inline std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
    const auto e = gwn(n, seed);
    std::vector<double> x(n);
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) x[t] = (acc += e[t]);
    return x;
}

inline std::vector<double> cumsum(std::vector<double> x) {
    for (std::size_t t = 1; t < x.size(); ++t) x[t] += x[t - 1];
    return x;
}

/// ARMA(p, m) with AR polynomial 1 - sum phi_i q^-i and MA polynomial 1 + sum theta_j q^-j.
inline std::vector<double> arma(std::size_t n, const std::vector<double>& phi, const std::vector<double>& theta,
                                std::uint64_t seed, std::size_t burn = 2000) {
    const auto e = gwn(n + burn, seed);
    std::vector<double> x(n + burn, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t) {
        double v = e[t];
        for (std::size_t i = 0; i < phi.size(); ++i) if (t > i) v += phi[i] * x[t - i - 1];
        for (std::size_t j = 0; j < theta.size(); ++j) if (t > j) v += theta[j] * e[t - j - 1];
        x[t] = v;
    }
    return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

/// GARCH(1,1): sigma2[k] = c0 + b x[k-1]^2 + a sigma2[k-1].
inline std::vector<double> garch11(std::size_t n, double c0, double b, double a, std::uint64_t seed,
                                   std::size_t burn = 1000) {
    const auto z = gwn(n + burn, seed);
    std::vector<double> x(n + burn);
    double s2 = c0 / (1.0 - a - b);
    double xprev2 = s2;
    for (std::size_t t = 0; t < x.size(); ++t) {
        s2 = c0 + b * xprev2 + a * s2;
        x[t] = std::sqrt(s2) * z[t];
        xprev2 = x[t] * x[t];
    }
    return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

/// y[k] = a y[k-1] + b y[k-1] e[k-1] + e[k]
inline std::vector<double> bilinear(std::size_t n, double a, double b, std::uint64_t seed, std::size_t burn = 1000) {
    const auto e = gwn(n + burn, seed);
    std::vector<double> y(n + burn, 0.0);
    for (std::size_t k = 1; k < y.size(); ++k) y[k] = a * y[k - 1] + b * y[k - 1] * e[k - 1] + e[k];
    return {y.begin() + static_cast<std::ptrdiff_t>(burn), y.end()};
}

/// x component of the Henon map x' = 1 - a x^2 + y, y' = b x.
inline std::vector<double> henon(std::size_t n, double a = 1.4, double b = 0.3, std::size_t burn = 1000) {
    double x = 0.1, y = 0.0;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n + burn; ++k) {
        const double xn = 1.0 - a * x * x + y;
        y = b * x;
        x = xn;
        if (k >= burn) out.push_back(x);
    }
    return out;
}

}  // namespace testsupport

#pragma once

// Random stationary/invertible ARMA polynomials built from their roots.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

struct ArmaCoefficients {
    std::vector<double> phi;    // 1 - sum phi_i z^i
    std::vector<double> theta;  // 1 + sum theta_j z^j
};

/// Coefficients c_1..c_k of prod (1 - z / r).
inline std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> c{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += c[i];
            next[i + 1] -= c[i] / r;
        }
        c = next;
    }
    std::vector<double> out;
    for (std::size_t i = 1; i < c.size(); ++i) out.push_back(c[i].real());
    return out;
}

/// Roots with modulus in [min_mod, max_mod]; a complex pair counts as two roots.
inline std::vector<std::complex<double>> random_roots(int order, std::mt19937_64& rng, double min_mod,
                                                      double max_mod) {
    std::uniform_real_distribution<double> mod(min_mod, max_mod);
    std::uniform_real_distribution<double> ang(0.3, 2.8);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::complex<double>> roots;
    while (static_cast<int>(roots.size()) < order) {
        const double r = mod(rng);
        if (order - static_cast<int>(roots.size()) >= 2 && coin(rng)) {
            const auto z = std::polar(r, ang(rng));
            roots.push_back(z);
            roots.push_back(std::conj(z));
        } else {
            roots.emplace_back(coin(rng) ? r : -r, 0.0);
        }
    }
    return roots;
}

/// ARMA(p, m) with every root modulus >= 1.1 and AR/MA roots at least `separation` apart,
/// so that no factor nearly cancels.
inline ArmaCoefficients random_arma(int p, int m, std::uint64_t seed, double separation = 0.5) {
    std::mt19937_64 rng(seed);
    for (;;) {
        const auto ar = random_roots(p, rng, 1.1, 3.0);
        const auto ma = random_roots(m, rng, 1.1, 3.0);
        bool ok = true;
        for (const auto& a : ar)
            for (const auto& b : ma)
                if (std::abs(a - b) < separation) ok = false;
        if (!ok) continue;
        ArmaCoefficients c;
        const auto pa = poly_from_roots(ar);
        const auto pm = poly_from_roots(ma);
        for (double v : pa) c.phi.push_back(-v);
        c.theta = pm;
        return c;
    }
}

}  // namespace testsupport

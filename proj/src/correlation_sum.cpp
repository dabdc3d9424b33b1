#include "correlation_sum.hpp"

#include "seisnoise/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace seisnoise::detail {

namespace {

constexpr std::size_t kBinCount = std::size_t{1} << 15;  // positive doubles only

std::size_t bin_of(double d) { return static_cast<std::size_t>(std::bit_cast<std::uint64_t>(d) >> 48); }

ScalingFit least_squares(const std::vector<double>& lr, const std::vector<double>& lc, std::size_t first,
                         std::size_t last) {
    const double nk = static_cast<double>(last - first + 1);
    double mx = 0.0, my = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
        mx += lr[k];
        my += lc[k];
    }
    mx /= nk;
    my /= nk;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
        sxy += (lr[k] - mx) * (lc[k] - my);
        sxx += (lr[k] - mx) * (lr[k] - mx);
        syy += (lc[k] - my) * (lc[k] - my);
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.r_low = std::exp(lr[first]);
    fit.r_high = std::exp(lr[last]);
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
    return fit;
}

}  // namespace

double DistanceHistogram::lower_edge(std::size_t bin) {
    return std::bit_cast<double>(static_cast<std::uint64_t>(bin) << 48);
}

DistanceHistogram distance_histogram(std::span<const double> x, int dimension, int delay, int theiler,
                                     std::span<const std::size_t> reference_points) {
    const std::size_t span = static_cast<std::size_t>((dimension - 1) * delay);
    const std::size_t m = x.size() - span;  // embedded points
    const auto w = static_cast<std::size_t>(theiler);

    DistanceHistogram h;
    h.counts.assign(kBinCount, 0);
    std::vector<double> dist(m);
    for (std::size_t i : reference_points) {
        const double* xi = x.data() + i;
        const double* xj = x.data();
        for (std::size_t j = 0; j < m; ++j) dist[j] = std::abs(xj[j] - xi[0]);
        for (int k = 1; k < dimension; ++k) {
            const std::size_t off = static_cast<std::size_t>(k * delay);
            const double ref = xi[off];
            const double* col = xj + off;
            for (std::size_t j = 0; j < m; ++j) dist[j] = std::max(dist[j], std::abs(col[j] - ref));
        }
        const std::size_t lo = i > w ? i - w : 0;
        const std::size_t hi = std::min(m, i + w + 1);
        for (std::size_t j = 0; j < lo; ++j) ++h.counts[bin_of(dist[j])];
        for (std::size_t j = hi; j < m; ++j) ++h.counts[bin_of(dist[j])];
        h.total_pairs += static_cast<double>(lo + (m - hi));
    }
    return h;
}

std::vector<std::pair<double, double>> correlation_curve(const DistanceHistogram& h) {
    std::vector<std::pair<double, double>> curve;
    double cum = 0.0;
    for (std::size_t b = 0; b + 1 < h.counts.size(); ++b) {
        cum += static_cast<double>(h.counts[b]);
        if (cum > 0.0 && h.counts[b] > 0) {
            curve.emplace_back(std::log(DistanceHistogram::lower_edge(b + 1)), std::log(cum / h.total_pairs));
        }
        if (cum >= h.total_pairs) break;
    }
    return curve;
}

ScalingFit fit_scaling_region(const DistanceHistogram& h, const ScalingBand& band) {
    if (!(band.lower > 0.0 && band.lower < band.upper && band.upper <= 1.0)) {
        throw ArgumentError("scaling band must satisfy 0 < lower < upper <= 1");
    }
    std::vector<double> lr, lc;
    double cum = 0.0;
    for (std::size_t b = 0; b + 1 < h.counts.size(); ++b) {
        cum += static_cast<double>(h.counts[b]);
        const double c = cum / h.total_pairs;
        if (c > band.upper) break;
        if (c >= band.lower) {
            lr.push_back(std::log(DistanceHistogram::lower_edge(b + 1)));
            lc.push_back(std::log(c));
        }
    }
    // A band narrower than a few bins means C jumps across it (ties or a
    // lattice-valued series); no slope can be read off.
    if (lr.size() < 4) throw DegenerateInputError("correlation sum has no resolvable scaling region");
    return least_squares(lr, lc, 0, lr.size() - 1);
}

}  // namespace seisnoise::detail

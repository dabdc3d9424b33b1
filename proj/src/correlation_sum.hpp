#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace seisnoise::detail {

/// Pair-distance histogram in max-norm over delay-embedded points. Bins follow
/// the IEEE-754 bit pattern of the distance (top 16 bits: sign, exponent and 4
/// mantissa bits), i.e. 16 logarithmic bins per octave, so C(r) is exact at
/// every bin edge.
struct DistanceHistogram {
    static constexpr int kBinsPerOctave = 16;
    std::vector<std::uint64_t> counts;  // indexed by bits >> 48
    double total_pairs = 0.0;

    static double lower_edge(std::size_t bin);
};

DistanceHistogram distance_histogram(std::span<const double> x, int dimension, int delay, int theiler,
                                     std::span<const std::size_t> reference_points);

struct ScalingFit {
    double slope = 0.0;
    double r_low = 0.0;
    double r_high = 0.0;
    double r_squared = 0.0;
};

/// Fit band expressed as correlation-sum levels: the scaling region is the
/// r range over which C(r) lies in [lower, upper].
struct ScalingBand {
    double lower = 0.01;
    double upper = 0.1;
};

/// Log-log curve (log r, log C) at every bin edge with C > 0.
std::vector<std::pair<double, double>> correlation_curve(const DistanceHistogram& h);

/// Least-squares slope of log C vs log r over the bin edges inside the band.
ScalingFit fit_scaling_region(const DistanceHistogram& h, const ScalingBand& band);

}  // namespace seisnoise::detail

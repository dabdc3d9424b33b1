#include "correlation_sum.hpp"
#include "parallel.hpp"
#include "seisnoise/errors.hpp"
#include "seisnoise/nonlinearity.hpp"
#include "seisnoise/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace seisnoise {

namespace {

constexpr std::size_t kMinEmbeddedPoints = 2000;

std::vector<std::size_t> reference_points(std::size_t n_points, int max_refs, std::uint64_t seed) {
    std::vector<std::size_t> idx(n_points);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto want = static_cast<std::size_t>(max_refs);
    if (want >= n_points) return idx;
    Rng rng(seed);
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < want; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n_points - 1);
        std::swap(idx[i], idx[pick(rng.engine())]);
    }
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
    return idx;
}

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

int autocorrelation_decay_lag(const Series& s) {
    const std::size_t max_lag = std::min<std::size_t>(s.size() / 10, 1000);
    if (max_lag < 1) throw ArgumentError("series too short to choose an embedding delay");
    const auto r = acf(s, max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        if (r[k] < std::exp(-1.0)) return static_cast<int>(k);
    }
    return static_cast<int>(max_lag);
}

ResolvedEmbedding resolve_embedding(const Series& s, const EmbeddingConfig& cfg) {
    if (cfg.dimension < 1) throw ArgumentError("embedding dimension must be >= 1");
    if (cfg.max_reference_points < 1) throw ArgumentError("max_reference_points must be >= 1");
    ResolvedEmbedding e;
    e.dimension = cfg.dimension;
    e.delay = cfg.delay ? *cfg.delay : autocorrelation_decay_lag(s);
    if (e.delay < 1) throw ArgumentError("embedding delay must be >= 1");
    e.theiler_window = cfg.theiler_window ? *cfg.theiler_window : e.dimension * e.delay;
    if (e.theiler_window < 0) throw ArgumentError("Theiler window must be >= 0");
    e.max_reference_points = cfg.max_reference_points;
    e.seed = cfg.seed;
    if (!(cfg.fit_c_low > 0.0 && cfg.fit_c_low < cfg.fit_c_high && cfg.fit_c_high <= 1.0)) {
        throw ArgumentError("fit band must satisfy 0 < fit_c_low < fit_c_high <= 1");
    }
    e.fit_c_low = cfg.fit_c_low;
    e.fit_c_high = cfg.fit_c_high;
    const auto span = static_cast<std::size_t>(e.dimension - 1) * static_cast<std::size_t>(e.delay);
    if (span >= s.size()) throw ArgumentError("(m - 1) * delay must be smaller than the series length");
    return e;
}

CorrelationDimEstimate correlation_dimension(const Series& s, const EmbeddingConfig& cfg) {
    if (s.size() < 2 || !(variance(s.values()) > 0.0)) {
        throw DegenerateInputError("correlation dimension of a constant series");
    }
    CorrelationDimEstimate est;
    est.embedding = resolve_embedding(s, cfg);
    const auto& e = est.embedding;
    const std::size_t n_points = s.size() - static_cast<std::size_t>((e.dimension - 1) * e.delay);
    if (n_points < kMinEmbeddedPoints) throw ArgumentError("correlation dimension needs >= 2000 embedded points");

    // Work on a standardized copy so bin edges do not depend on the data's units.
    const auto v = s.values();
    const double mu = mean(v);
    const double sd = std::sqrt(variance(v));
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mu) / sd;

    const auto refs = reference_points(n_points, e.max_reference_points, e.seed);
    const auto hist = detail::distance_histogram(z, e.dimension, e.delay, e.theiler_window, refs);
    if (hist.total_pairs <= 0.0) throw ArgumentError("Theiler window excludes every pair");
    est.pairs_counted = hist.total_pairs;

    const auto fit = detail::fit_scaling_region(hist, {e.fit_c_low, e.fit_c_high});
    est.d2 = std::max(0.0, fit.slope);
    est.r_fit_range = {fit.r_low * sd, fit.r_high * sd};
    est.fit_r_squared = fit.r_squared;
    est.reliable = fit.r_squared >= 0.9;
    est.curve = detail::correlation_curve(hist);
    const double log_sd = std::log(sd);
    for (auto& [lr, lc] : est.curve) lr += log_sd;
    return est;
}

LinearityResult linearity_test(const Series& s, const LinearityOptions& opts) {
    if (opts.n_surrogates < 19) throw ArgumentError("linearity test needs at least 19 surrogates");
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");

    // One embedding (delay, Theiler window, reference points) for data and surrogates alike.
    EmbeddingConfig cfg = opts.embedding;
    const auto resolved = resolve_embedding(s, cfg);
    cfg.delay = resolved.delay;
    cfg.theiler_window = resolved.theiler_window;

    LinearityResult res;
    res.data_estimate = correlation_dimension(s, cfg);
    res.surrogate_d2.assign(static_cast<std::size_t>(opts.n_surrogates), 0.0);
    detail::parallel_for(res.surrogate_d2.size(), opts.threads, [&](std::size_t i) {
        const auto sur = aaft_surrogate(s, derive_seed(opts.seed, i));
        res.surrogate_d2[i] = correlation_dimension(sur, cfg).d2;
    });

    std::vector<double> sorted = res.surrogate_d2;
    std::sort(sorted.begin(), sorted.end());
    auto& out = res.outcome;
    out.name = "linearity";
    out.statistic = res.data_estimate.d2;
    out.alpha = opts.alpha;
    out.tail = Tail::two;
    if (opts.n_surrogates <= 20) {
        out.critical_lower = sorted.front();
        out.critical_upper = sorted.back();
    } else {
        out.critical_lower = quantile_sorted(sorted, opts.alpha / 2.0);
        out.critical_upper = quantile_sorted(sorted, 1.0 - opts.alpha / 2.0);
    }
    out.reject_null = out.decision_from_critical();
    const auto below = std::count_if(sorted.begin(), sorted.end(), [&](double d) { return d < out.statistic; });
    out.details["n_surrogates"] = opts.n_surrogates;
    out.details["rank"] = static_cast<double>(below);  // surrogates with smaller D2
    out.details["dimension"] = resolved.dimension;
    out.details["delay"] = resolved.delay;
    out.details["theiler_window"] = resolved.theiler_window;
    out.details["surrogate_mean"] = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    return res;
}

}  // namespace seisnoise

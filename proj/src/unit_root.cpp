#include "regression.hpp"
#include "seisnoise/errors.hpp"
#include "seisnoise/stat_tests.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

namespace seisnoise {

namespace {

// MacKinnon (1994) approximate asymptotic p-value surfaces for one series,
// indexed by deterministic variant {none, drift, trend}.
struct PvalueSurface {
    double tau_max;
    double tau_min;
    double tau_star;
    std::array<double, 3> small_p;  // already scaled
    std::array<double, 4> large_p;  // already scaled
};

constexpr std::array<PvalueSurface, 3> kSurfaces{{
    {std::numeric_limits<double>::infinity(), -19.04, -1.04,
     {0.6344, 1.2378, 3.2496e-2},
     {0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2}},
    {2.74, -18.83, -1.61,
     {2.1659, 1.4412, 3.8269e-2},
     {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}},
    {0.7, -16.18, -2.89,
     {3.2512, 1.6047, 4.9588e-2},
     {2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2}},
}};

// MacKinnon (2010) response surfaces: crit(T) = b0 + b1/T + b2/T^2 + b3/T^3,
// rows are the 1%, 5% and 10% levels.
constexpr std::array<std::array<std::array<double, 4>, 3>, 3> kResponseSurfaces{{
    {{{-2.56574, -2.2358, -3.627, 0.0}, {-1.94100, -0.2686, -3.365, 31.223}, {-1.61682, 0.2656, -2.714, 25.364}}},
    {{{-3.43035, -6.5393, -16.786, -79.433}, {-2.86154, -2.8903, -4.234, -40.040}, {-2.56677, -1.5384, -2.809, 0.0}}},
    {{{-3.95877, -9.0531, -28.428, -134.155}, {-3.41049, -4.3904, -9.036, -45.374}, {-3.12705, -2.5856, -3.925, -22.380}}},
}};

std::size_t variant_index(Deterministic d) { return static_cast<std::size_t>(d); }

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

int deterministic_columns(Deterministic d) {
    switch (d) {
        case Deterministic::none: return 0;
        case Deterministic::drift: return 1;
        case Deterministic::trend: return 2;
    }
    return 0;
}

void fill_deterministic(Eigen::MatrixXd& X, Eigen::Index row, std::size_t t, std::size_t n, Deterministic d) {
    if (d == Deterministic::none) return;
    X(row, 0) = 1.0;
    if (d == Deterministic::trend) X(row, 1) = static_cast<double>(t) / static_cast<double>(n);
}

void check_unit_root_input(const Series& s) {
    if (s.size() < 50) throw ArgumentError("unit-root tests require at least 50 samples");
    if (!(variance(s.values()) > 0.0)) throw DegenerateInputError("unit-root test on a constant series");
}

TestOutcome make_left_outcome(std::string name, double tau, Deterministic det, double alpha) {
    TestOutcome out;
    out.name = std::move(name);
    out.statistic = tau;
    out.alpha = alpha;
    out.tail = Tail::left;
    out.p_value = dickey_fuller_pvalue(tau, det);
    out.critical_lower = dickey_fuller_critical(det, alpha);
    out.reject_null = tau < *out.critical_lower;
    return out;
}

}  // namespace

std::string to_string(Deterministic d) {
    switch (d) {
        case Deterministic::none: return "none";
        case Deterministic::drift: return "drift";
        case Deterministic::trend: return "trend";
    }
    return "none";
}

Deterministic deterministic_from_string(const std::string& s) {
    if (s == "none") return Deterministic::none;
    if (s == "drift") return Deterministic::drift;
    if (s == "trend") return Deterministic::trend;
    throw ArgumentError("unknown deterministic variant: " + s);
}

int schwert_lag_order(std::size_t n) {
    return static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

int newey_west_bandwidth(std::size_t n) {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double dickey_fuller_pvalue(double tau, Deterministic det) {
    const auto& s = kSurfaces[variant_index(det)];
    if (tau > s.tau_max) return 1.0;
    if (tau < s.tau_min) return 0.0;
    double z = 0.0;
    if (tau <= s.tau_star) {
        z = s.small_p[0] + tau * (s.small_p[1] + tau * s.small_p[2]);
    } else {
        z = s.large_p[0] + tau * (s.large_p[1] + tau * (s.large_p[2] + tau * s.large_p[3]));
    }
    return normal_cdf(z);
}

double dickey_fuller_critical(Deterministic det, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    const auto& s = kSurfaces[variant_index(det)];
    // p(tau) is increasing; bisect on the tabulated support.
    double lo = s.tau_min;
    double hi = std::isfinite(s.tau_max) ? s.tau_max : 10.0;
    if (dickey_fuller_pvalue(hi, det) < alpha) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dickey_fuller_pvalue(mid, det) < alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double dickey_fuller_table_critical(Deterministic det, double level, std::size_t nobs) {
    int row = -1;
    if (std::abs(level - 0.01) < 1e-12) row = 0;
    if (std::abs(level - 0.05) < 1e-12) row = 1;
    if (std::abs(level - 0.10) < 1e-12) row = 2;
    if (row < 0) throw ArgumentError("response-surface critical values exist only at 0.01, 0.05 and 0.10");
    const auto& b = kResponseSurfaces[variant_index(det)][static_cast<std::size_t>(row)];
    const double inv = 1.0 / static_cast<double>(nobs);
    return b[0] + inv * (b[1] + inv * (b[2] + inv * b[3]));
}

TestOutcome adf_test(const Series& s, const UnitRootConfig& cfg, double alpha) {
    check_unit_root_input(s);
    const std::size_t n = s.size();
    const int lags = cfg.lag_order.value_or(schwert_lag_order(n));
    if (lags < 0) throw ArgumentError("ADF lag order must be nonnegative");
    const int ndet = deterministic_columns(cfg.deterministic);
    const std::size_t first = static_cast<std::size_t>(lags) + 1;  // first usable t
    if (n < first + static_cast<std::size_t>(ndet + lags + 1) + 10) {
        throw ArgumentError("series too short for the requested ADF lag order");
    }
    const auto y = s.values();
    const auto nobs = static_cast<Eigen::Index>(n - first);
    const Eigen::Index k = ndet + 1 + lags;
    Eigen::MatrixXd X(nobs, k);
    Eigen::VectorXd dy(nobs);
    for (Eigen::Index r = 0; r < nobs; ++r) {
        const std::size_t t = first + static_cast<std::size_t>(r);
        dy(r) = y[t] - y[t - 1];
        fill_deterministic(X, r, t, n, cfg.deterministic);
        X(r, ndet) = y[t - 1];
        for (int i = 1; i <= lags; ++i) X(r, ndet + i) = y[t - i] - y[t - i - 1];
    }
    const auto fit = detail::ols(X, dy);
    if (!(fit.std_errors(ndet) > 0.0)) throw DegenerateInputError("ADF regression has zero residual variance");
    const double tau = fit.beta(ndet) / fit.std_errors(ndet);

    auto out = make_left_outcome("adf", tau, cfg.deterministic, alpha);
    out.details["lag_order"] = lags;
    out.details["nobs"] = static_cast<double>(nobs);
    out.details["rho"] = 1.0 + fit.beta(ndet);
    return out;
}

TestOutcome pp_test(const Series& s, const UnitRootConfig& cfg, double alpha) {
    check_unit_root_input(s);
    const std::size_t n = s.size();
    const int bandwidth = cfg.lag_order.value_or(newey_west_bandwidth(n));
    if (bandwidth < 0) throw ArgumentError("PP bandwidth must be nonnegative");
    const int ndet = deterministic_columns(cfg.deterministic);
    const auto y = s.values();
    const auto nobs = static_cast<Eigen::Index>(n - 1);
    Eigen::MatrixXd X(nobs, ndet + 1);
    Eigen::VectorXd yt(nobs);
    for (Eigen::Index r = 0; r < nobs; ++r) {
        const std::size_t t = static_cast<std::size_t>(r) + 1;
        yt(r) = y[t];
        fill_deterministic(X, r, t, n, cfg.deterministic);
        X(r, ndet) = y[t - 1];
    }
    const auto fit = detail::ols(X, yt);
    const double se = fit.std_errors(ndet);
    if (!(se > 0.0)) throw DegenerateInputError("PP regression has zero residual variance");
    const double t_stat = (fit.beta(ndet) - 1.0) / se;

    const auto& u = fit.residuals;
    const double nd = static_cast<double>(nobs);
    const double gamma0 = u.squaredNorm() / nd;
    double lambda2 = gamma0;
    for (int j = 1; j <= bandwidth && j < nobs; ++j) {
        const double gj = u.tail(nobs - j).dot(u.head(nobs - j)) / nd;
        lambda2 += 2.0 * (1.0 - static_cast<double>(j) / (bandwidth + 1.0)) * gj;
    }
    if (!(lambda2 > 0.0)) throw DegenerateInputError("non-positive long-run variance in PP test");
    const double z_tau = std::sqrt(gamma0 / lambda2) * t_stat -
                         0.5 * (lambda2 - gamma0) / std::sqrt(lambda2) * nd * se / std::sqrt(fit.sigma2);

    auto out = make_left_outcome("pp", z_tau, cfg.deterministic, alpha);
    out.details["bandwidth"] = bandwidth;
    out.details["nobs"] = nd;
    out.details["rho"] = fit.beta(ndet);
    return out;
}

double ar1_coefficient(const Series& s) {
    if (s.size() < 100) throw ArgumentError("ar1_coefficient requires at least 100 samples");
    if (!(variance(s.values()) > 0.0)) throw DegenerateInputError("ar1_coefficient of a constant series");
    const auto y = s.values();
    const std::size_t n = y.size();
    // Closed-form OLS of y[t] on (1, y[t-1]).
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        mx += y[t - 1];
        my += y[t];
    }
    mx /= static_cast<double>(n - 1);
    my /= static_cast<double>(n - 1);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        sxy += (y[t - 1] - mx) * (y[t] - my);
        sxx += (y[t - 1] - mx) * (y[t - 1] - mx);
    }
    if (!(sxx > 0.0)) throw DegenerateInputError("ar1_coefficient: lagged regressor has zero variance");
    return sxy / sxx;
}

}  // namespace seisnoise

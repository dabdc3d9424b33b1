#include "seisnoise/series.hpp"

#include "fft.hpp"
#include "seisnoise/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>

namespace seisnoise {

Series::Series(std::vector<double> values, double sample_rate, Meta meta)
    : values_(std::move(values)), sample_rate_(sample_rate), meta_(std::move(meta)) {
    if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
        throw ArgumentError("sample_rate must be positive and finite");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ArgumentError("non-finite sample at index " + std::to_string(i));
        }
    }
}

Series Series::with_values(std::vector<double> values) const {
    return Series(std::move(values), sample_rate_, meta_);
}

Series Series::head(std::size_t n) const {
    if (n >= values_.size()) return *this;
    return with_values(std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n)));
}

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const double mu = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    return ss / static_cast<double>(x.size());
}

CorrelationSequence acf(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    if (n < 30) throw ArgumentError("acf requires at least 30 samples");
    if (max_lag >= n) throw ArgumentError("acf max_lag must be smaller than the series length");

    const double mu = mean(x);
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - mu;
    double c0 = 0.0;
    for (double v : c) c0 += v * v;
    if (!(c0 > 0.0)) throw DegenerateInputError("acf of a constant series is undefined");

    CorrelationSequence out;
    out.lags.resize(max_lag + 1);
    out.coefficients.resize(max_lag + 1);
    out.n_effective = n;
    out.confidence_band = 1.96 / std::sqrt(static_cast<double>(n));
    out.lags[0] = 0;
    out.coefficients[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t i = k; i < n; ++i) ck += c[i] * c[i - k];
        out.lags[k] = k;
        out.coefficients[k] = ck / c0;
    }
    return out;
}

CorrelationSequence acf(const Series& s, std::size_t max_lag) { return acf(s.values(), max_lag); }

CorrelationSequence pacf(const Series& s, std::size_t max_lag) {
    const auto r = acf(s, max_lag);
    CorrelationSequence out = r;
    // Durbin-Levinson: phi holds the AR(k) coefficients fitted to the ACF.
    std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
    double v = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * r[k - j];
        const double kappa = v > 0.0 ? num / v : 0.0;
        phi[k] = kappa;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - kappa * prev[k - j];
        v *= (1.0 - kappa * kappa);
        out.coefficients[k] = kappa;
        prev = phi;
    }
    return out;
}

Spectrum periodogram(const Series& s, PeriodogramOptions opts) {
    const std::size_t n = s.size();
    if (n < 64) throw ArgumentError("periodogram requires at least 64 samples");

    const double mu = mean(s.values());
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = s[i] - mu;

    double window_power = 1.0;
    if (opts.hann_taper) {
        double wss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
            x[i] *= w;
            wss += w * w;
        }
        window_power = wss / static_cast<double>(n);
    }

    const auto coeffs = detail::rfft(x);
    const double fs = s.sample_rate();
    const double norm = 1.0 / (static_cast<double>(n) * fs * window_power);

    Spectrum out;
    out.frequencies.resize(coeffs.size());
    out.power.resize(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        out.frequencies[k] = static_cast<double>(k) * fs / static_cast<double>(n);
        const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
        out.power[k] = (edge ? 1.0 : 2.0) * std::norm(coeffs[k]) * norm;
    }
    return out;
}

std::vector<double> difference(std::span<const double> x, int d) {
    if (d < 0) throw ArgumentError("difference order must be nonnegative");
    if (static_cast<std::size_t>(d) >= x.size()) throw ArgumentError("difference order must be smaller than the series length");
    std::vector<double> out(x.begin(), x.end());
    for (int pass = 0; pass < d; ++pass) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
        out.pop_back();
    }
    return out;
}

Series difference(const Series& s, int d) { return s.with_values(difference(s.values(), d)); }

Series detrend(const Series& s, int degree) {
    if (degree < 0 || degree > 2) throw ArgumentError("detrend degree must be 0, 1 or 2");
    const std::size_t n = s.size();
    if (n <= static_cast<std::size_t>(degree) + 1) throw ArgumentError("series too short for detrend degree");

    // Abscissa scaled to [-1, 1] keeps the normal equations well conditioned.
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), degree + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    const double half = 0.5 * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) - half) / half;
        double p = 1.0;
        for (int j = 0; j <= degree; ++j) {
            X(static_cast<Eigen::Index>(i), j) = p;
            p *= t;
        }
        y(static_cast<Eigen::Index>(i)) = s[i];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd resid = y - X * beta;
    return s.with_values(std::vector<double>(resid.data(), resid.data() + resid.size()));
}

}  // namespace seisnoise

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace seisnoise {

/// A uniformly sampled real-valued record.
///
/// Values are validated at construction (all finite, sample_rate > 0) and are
/// immutable afterwards; derived series are produced with with_values().
class Series {
public:
    using Meta = std::map<std::string, std::string>;

    Series(std::vector<double> values, double sample_rate, Meta meta = {});

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& data() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double sample_rate() const noexcept { return sample_rate_; }
    [[nodiscard]] const Meta& meta() const noexcept { return meta_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

    /// New series with the same rate and provenance but different samples.
    [[nodiscard]] Series with_values(std::vector<double> values) const;

    /// First n samples (or the whole series if shorter).
    [[nodiscard]] Series head(std::size_t n) const;

    friend bool operator==(const Series&, const Series&) = default;

private:
    std::vector<double> values_;
    double sample_rate_;
    Meta meta_;
};

struct CorrelationSequence {
    std::vector<std::size_t> lags;
    std::vector<double> coefficients;
    std::size_t n_effective = 0;
    double confidence_band = 0.0;  // +-1.96/sqrt(n_effective)

    [[nodiscard]] double operator[](std::size_t lag) const { return coefficients.at(lag); }
    [[nodiscard]] std::size_t max_lag() const noexcept {
        return coefficients.empty() ? 0 : coefficients.size() - 1;
    }
};

/// One-sided power spectral density on [0, Nyquist].
struct Spectrum {
    std::vector<double> frequencies;  // Hz
    std::vector<double> power;        // units^2 / Hz

    [[nodiscard]] double resolution() const noexcept {
        return frequencies.size() > 1 ? frequencies[1] - frequencies[0] : 0.0;
    }
};

struct PeriodogramOptions {
    bool hann_taper = false;
};

double mean(std::span<const double> x);
/// Population variance (divides by N).
double variance(std::span<const double> x);

/// Biased sample autocorrelation (divides by N); lag 0 is exactly 1.
CorrelationSequence acf(const Series& s, std::size_t max_lag);
CorrelationSequence acf(std::span<const double> x, std::size_t max_lag);

/// Partial autocorrelation via the Durbin-Levinson recursion on the sample ACF.
CorrelationSequence pacf(const Series& s, std::size_t max_lag);

Spectrum periodogram(const Series& s, PeriodogramOptions opts = {});

/// d-th order backward difference; output length is size() - d.
Series difference(const Series& s, int d);
std::vector<double> difference(std::span<const double> x, int d);

/// Subtracts the least-squares polynomial of the given degree (0, 1 or 2).
Series detrend(const Series& s, int degree);

}  // namespace seisnoise

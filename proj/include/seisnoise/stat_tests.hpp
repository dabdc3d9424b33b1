#pragma once

#include "seisnoise/series.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seisnoise {

enum class Tail { left, right, two };

/// Result of a hypothesis test at significance level `alpha`.
///
/// The decision is always derivable from (statistic, critical values, tail):
/// left rejects below critical_lower, right rejects above critical_upper and
/// two rejects outside [critical_lower, critical_upper]. When a p-value is
/// reported, reject_null == (p_value < alpha) as well.
struct TestOutcome {
    std::string name;
    double statistic = 0.0;
    std::optional<double> p_value;
    std::optional<double> critical_lower;
    std::optional<double> critical_upper;
    Tail tail = Tail::right;
    bool reject_null = false;
    double alpha = 0.05;
    std::map<std::string, double> details;

    /// Decision recomputed from statistic, critical values and tail.
    [[nodiscard]] bool decision_from_critical() const;
};

std::string to_string(Tail tail);
Tail tail_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Unit-root tests

enum class Deterministic { none, drift, trend };

std::string to_string(Deterministic d);
Deterministic deterministic_from_string(const std::string& s);

struct UnitRootConfig {
    Deterministic deterministic = Deterministic::trend;
    /// Augmentation order (ADF) or Newey-West bandwidth (PP); nullopt selects
    /// floor(12 (N/100)^0.25) for ADF and floor(4 (N/100)^0.25) for PP.
    std::optional<int> lag_order;
};

int schwert_lag_order(std::size_t n);
int newey_west_bandwidth(std::size_t n);

/// Approximate asymptotic p-value of a Dickey-Fuller tau statistic (single series).
double dickey_fuller_pvalue(double tau, Deterministic det);

/// Critical value at level alpha, the tau at which dickey_fuller_pvalue equals alpha.
double dickey_fuller_critical(Deterministic det, double alpha);

/// Finite-sample response-surface critical value at the tabulated levels 0.01, 0.05, 0.10.
double dickey_fuller_table_critical(Deterministic det, double level, std::size_t nobs);

TestOutcome adf_test(const Series& s, const UnitRootConfig& cfg = {}, double alpha = 0.05);
TestOutcome pp_test(const Series& s, const UnitRootConfig& cfg = {}, double alpha = 0.05);

/// Least-squares lag-1 autoregressive coefficient (with intercept).
double ar1_coefficient(const Series& s);

/// Threshold on ar1_coefficient above which an integrating effect is declared.
inline constexpr double kIntegratingAr1Threshold = 0.967;

// ---------------------------------------------------------------------------
// Priestley-Subba Rao evolutionary-spectrum test

struct PsrOutcome {
    TestOutcome t_component;    // time effect
    TestOutcome ir_component;   // interaction + residual
    TestOutcome tir_component;  // total
    int n_time_blocks = 0;
    int n_freq_points = 0;
    int segment_length = 0;        // short (data) window length
    int segments_per_block = 0;    // time smoothing: periodograms averaged per block
    double log_variance = 0.0;     // known variance of the log-spectral estimates
    double alpha = 0.05;           // overall level
    std::vector<double> frequencies;  // grid frequencies, Hz
    std::vector<std::vector<double>> log_spectrum;  // [block][frequency]

    [[nodiscard]] bool reject_null() const {
        return t_component.reject_null || ir_component.reject_null || tir_component.reject_null;
    }
};

/// Default time-block count: blocks of at least 1024 samples, at most 15 of them.
int default_psr_time_blocks(std::size_t n);
inline constexpr int kDefaultPsrFreqPoints = 16;

PsrOutcome psr_test(const Series& s, int n_time_blocks, int n_freq_points, double alpha = 0.05);
PsrOutcome psr_test(const Series& s, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Residual tests

TestOutcome arch_lm_test(const Series& x, int lags = 1, double alpha = 0.05);

struct SwWeights {
    std::vector<double> coefficients;  // a_1..a_N, antisymmetric
    std::size_t sample_size = 0;
};

SwWeights shapiro_wilk_weights(std::size_t n);
TestOutcome shapiro_wilk(const Series& x, double alpha = 0.05);
/// W below which the Shapiro-Wilk p-value falls under alpha.
double shapiro_wilk_critical_w(std::size_t n, double alpha);

enum class WhitenessBand {
    standard,  // +-1.96/sqrt(N)
    robust,    // heteroskedasticity-consistent band per lag
};

/// ACF significance test: passes when the fraction of lags 1..max_lag outside
/// the band is at most alpha + 0.02. Ljung-Box Q and its p-value are attached
/// as details but do not drive the decision.
TestOutcome whiteness_test(std::span<const double> x, int max_lag, double alpha = 0.05,
                           WhitenessBand band = WhitenessBand::standard);
TestOutcome whiteness_test(const Series& x, int max_lag, double alpha = 0.05,
                           WhitenessBand band = WhitenessBand::standard);

/// Lag count used by the pipeline and GARCH validation: min(500, N/10).
int default_whiteness_lags(std::size_t n);

}  // namespace seisnoise

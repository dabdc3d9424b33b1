#pragma once

#include "seisnoise/arima.hpp"
#include "seisnoise/errors.hpp"
#include "seisnoise/series.hpp"
#include "seisnoise/stat_tests.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seisnoise {

/// GARCH(P, Q): X[k] = sigma_k eps[k],
///   sigma_k^2 = c0 + sum_{i<=P} b_i X[k-i]^2 + sum_{j<=Q} a_j sigma_{k-j}^2.
struct GarchModel {
    int P = 1;
    int Q = 0;
    double c0 = 1.0, c0_se = 0.0;
    std::vector<double> arch, arch_se;    // b_1..b_P
    std::vector<double> garch, garch_se;  // a_1..a_Q
    double log_likelihood = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::size_t n_fit = 0;
    bool nonstationary_variance = false;    // optimum on the persistence = 1 boundary
    bool near_integrated_variance = false;  // persistence > 0.999
    bool not_validated = false;             // order sweep found no candidate passing validate_garch

    [[nodiscard]] double persistence() const;
    /// c0 / (1 - persistence); infinite when persistence >= 1.
    [[nodiscard]] double unconditional_variance() const;
    [[nodiscard]] int free_parameter_count() const { return 1 + P + Q; }
    [[nodiscard]] std::string order_string() const;  // "GARCH(P,Q)"
};

/// Validated model with zero standard errors, for simulation.
GarchModel make_garch(double c0, std::vector<double> arch, std::vector<double> garch);

struct GarchFit {
    GarchModel model;
    Series standardized{std::vector<double>{}, 1.0};  // X[k] / sigma_k
    std::vector<double> conditional_variance;          // sigma_k^2
    bool converged = false;
    int iterations = 0;
};

class GarchEstimationError : public EstimationError {
public:
    GarchEstimationError(const std::string& what, GarchFit best) : EstimationError(what), best_(std::move(best)) {}
    [[nodiscard]] const GarchFit& best_so_far() const noexcept { return best_; }

private:
    GarchFit best_;
};

struct GarchFitOptions {
    int max_iterations = 500;
};

/// Gaussian quasi-maximum likelihood. Pre-sample sigma^2 and X^2 are the mean square of x.
GarchFit fit_garch(const Series& x, int P, int Q, const GarchFitOptions& opts = {});

/// Conditional variances of `model` on `x` with the same pre-sample convention as fit_garch.
std::vector<double> garch_conditional_variance(const GarchModel& model, std::span<const double> x);

/// Gaussian log-likelihood of `model` on `x`.
double garch_log_likelihood(const GarchModel& model, std::span<const double> x);

struct GarchValidation {
    TestOutcome residual_whiteness;  // standardized residuals
    TestOutcome squared_whiteness;   // their squares
    [[nodiscard]] bool accepted() const { return !residual_whiteness.reject_null && !squared_whiteness.reject_null; }
};

/// Whiteness of z and z^2; lags default to default_whiteness_lags(size).
GarchValidation validate_garch(const GarchModel& model, const Series& standardized, double alpha = 0.05,
                               std::optional<int> lags = std::nullopt);

struct GarchSweepOptions {
    std::vector<int> P_values{1, 2};
    std::vector<int> Q_values{0, 1, 2};
    double alpha = 0.05;
    int threads = 0;
    GarchFitOptions fit;
};

struct GarchCandidate {
    int P = 0;
    int Q = 0;
    double aic = 0.0;
    bool accepted = false;
    bool estimated = false;
};

struct GarchSelection {
    GarchFit selected;
    GarchValidation validation;
    std::vector<GarchCandidate> candidates;  // sorted by AIC
};

/// Lowest-AIC order whose standardized residuals pass validate_garch; otherwise the
/// lowest-AIC fit flagged not_validated.
GarchSelection select_garch(const Series& x, const GarchSweepOptions& opts = {});

inline constexpr std::size_t kGarchBurnIn = 1000;

/// Standard Gaussian eps; burn-in of kGarchBurnIn samples discarded.
Series simulate_garch(const GarchModel& model, std::size_t n, std::uint64_t seed, double sample_rate = 1.0);

/// ARIMA driven by GARCH innovations: simulate_garch supplies e[k] (including the
/// ARIMA burn-in) and filter_arima shapes it. model.innovation_variance is ignored.
Series simulate_arima(const ArimaModel& model, const GarchModel& innovations, std::size_t n, std::uint64_t seed,
                      double sample_rate = 1.0);

}  // namespace seisnoise

#pragma once

#include "seisnoise/errors.hpp"
#include "seisnoise/series.hpp"
#include "seisnoise/stat_tests.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seisnoise {

/// ARIMA(p, d, m) in the convention
///   (1 - sum phi_i q^-i) (1 - q^-1)^d y[k] = (1 + sum theta_j q^-j) e[k],  e ~ N(0, sigma_e^2).
/// Coefficients pinned to zero by order reduction keep their slot; their
/// standard error is 0 and *_free is false.
struct ArimaModel {
    int p = 0;
    int d = 0;
    int m = 0;
    std::vector<double> ar, ar_se;
    std::vector<double> ma, ma_se;
    std::vector<bool> ar_free, ma_free;
    double mean = 0.0;  // removed before fitting when d = 0
    bool includes_mean = false;
    double innovation_variance = 1.0;
    std::size_t n_fit = 0;
    double log_likelihood = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    bool boundary = false;       // a root modulus within 1e-3 of the unit circle
    bool not_validated = false;  // order selection found no candidate passing both checks

    /// Free parameters counted by AIC/BIC: free coefficients, sigma_e^2, and the mean if estimated.
    [[nodiscard]] int free_parameter_count() const;
    [[nodiscard]] std::string order_string() const;  // "ARIMA(p,d,m)"
};

/// Model with unset standard errors, for simulation.
ArimaModel make_arima(std::vector<double> ar, int d, std::vector<double> ma, double innovation_variance,
                      double mean = 0.0);

/// Smallest modulus among the roots of 1 - sum c_i z^i (infinity for an empty polynomial).
double min_root_modulus(std::span<const double> coefficients);
bool is_stationary(const ArimaModel& model);
bool is_invertible(const ArimaModel& model);

/// True when some AR root and MA root lie within rel_tol (relative) of each
/// other, i.e. the two polynomials nearly share a factor that cancels.
bool has_common_factor(const ArimaModel& model, double rel_tol = 0.05);

struct FitDiagnostics {
    Series residuals{std::vector<double>{}, 1.0};
    TestOutcome whiteness;
    std::vector<std::string> insignificant_params;  // "ar1", "ma2", ...
    bool converged = false;
    int iterations = 0;
};

struct ArimaFit {
    ArimaModel model;
    FitDiagnostics diagnostics;
};

class ArimaEstimationError : public EstimationError {
public:
    ArimaEstimationError(const std::string& what, ArimaFit best) : EstimationError(what), best_(std::move(best)) {}
    [[nodiscard]] const ArimaFit& best_so_far() const noexcept { return best_; }

private:
    ArimaFit best_;
};

struct ArimaFitOptions {
    double alpha = 0.05;  // significance level of the zero-exclusion check
    int max_iterations = 200;
    std::optional<int> whiteness_lags;  // default: default_whiteness_lags(residual count)
    WhitenessBand whiteness_band = WhitenessBand::robust;
    bool demean = true;  // fit_arma only; fit_arima demeans iff d = 0
};

/// ARMA(p, m) on an already stationary series (d recorded as 0).
ArimaFit fit_arma(const Series& s, int p, int m, const ArimaFitOptions& opts = {});

/// ARMA with some coefficients pinned to zero (mask entry false).
ArimaFit fit_arma_masked(const Series& s, const std::vector<bool>& ar_free, const std::vector<bool>& ma_free,
                         const ArimaFitOptions& opts = {});

ArimaFit fit_arima(const Series& s, int p, int d, int m, const ArimaFitOptions& opts = {});

/// Residuals of `model` on `s` (s is differenced d times first).
Series arima_residuals(const ArimaModel& model, const Series& s);

struct OrderSelectionOptions {
    int p_max = 6;
    int m_max = 4;
    double alpha = 0.05;
    int threads = 0;
    ArimaFitOptions fit;
};

struct OrderCandidate {
    int p = 0;
    int m = 0;
    double aic = 0.0;
    bool white = false;
    bool significant = false;
    bool redundant = false;  // AR and MA polynomials share a near-common root
    bool estimated = false;  // false when the fit failed
};

struct OrderSelection {
    ArimaFit selected;
    std::vector<OrderCandidate> candidates;  // sorted by AIC
    int reductions = 0;                      // refits after pinning insignificant terms
};

/// Lowest-AIC (p, m) whose residuals are white and whose parameters are all
/// significant. Insignificant terms are pinned to zero one at a time (least
/// significant first) and the model re-estimated and re-checked. Candidates
/// with a near-common AR/MA factor are skipped as overparameterized.
OrderSelection select_order(const Series& s, int d, const OrderSelectionOptions& opts = {});

// ---------------------------------------------------------------------------
// Order of integration

struct DifferencingPolicy {
    Deterministic first_stage = Deterministic::trend;  // regressors of the unit-root tests on the raw series
    Deterministic later_stages = Deterministic::none;  // ... and on differenced series
    // A stage where ADF and PP both reject still counts as integrating when
    // ar1_coefficient exceeds the threshold (the AR(1) cross-check of the tests).
    bool ar1_verification = true;
};

struct IntegrationStage {
    int d = 0;
    bool psr_run = false;
    bool heteroskedastic = false;  // PSR rejected
    double ar1 = 0.0;
    std::optional<TestOutcome> adf;
    std::optional<TestOutcome> pp;
    bool integrating = false;
    std::string method;  // "ar1", "adf+pp" or "adf+pp+ar1"
};

struct IntegrationOrder {
    int d = 0;
    bool still_integrating = false;
    std::vector<IntegrationStage> stages;
};

/// Smallest d whose differenced series shows no integrating effect. Stages whose
/// PSR test rejects homoskedasticity decide by ar1_coefficient > 0.967,
/// otherwise an integrating effect is declared unless both ADF and PP reject
/// (and, with ar1_verification, the AR(1) coefficient agrees).
IntegrationOrder determine_d(const Series& s, double alpha = 0.05, int d_max = 3, const DifferencingPolicy& policy = {});

// ---------------------------------------------------------------------------
// Simulation

inline std::size_t arima_burn_in(const ArimaModel& m) { return 10 * static_cast<std::size_t>(m.p + m.m + 1); }

/// Drives the ARMA recursion with `innovations` (length n + burn-in), drops the
/// burn-in, adds the mean, then integrates d times starting from zero.
Series filter_arima(const ArimaModel& model, std::span<const double> innovations, double sample_rate = 1.0);

/// Gaussian innovations with variance model.innovation_variance.
Series simulate_arima(const ArimaModel& model, std::size_t n, std::uint64_t seed, double sample_rate = 1.0);

}  // namespace seisnoise

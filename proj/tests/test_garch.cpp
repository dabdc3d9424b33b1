#include <catch_amalgamated.hpp>

#include "seisnoise/errors.hpp"
#include "seisnoise/garch.hpp"
#include "support/flagship.hpp"
#include "support/simulate.hpp"

#include <cmath>
#include <numbers>

using namespace seisnoise;
using Catch::Approx;

namespace {

Series make(std::vector<double> v) { return Series(std::move(v), 20.0); }

double mean_square(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s / static_cast<double>(x.size());
}

// Constant-variance Gaussian log-likelihood at its optimum sigma^2 = mean square.
double constant_loglik(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    return -0.5 * n * (std::log(2.0 * std::numbers::pi * mean_square(x)) + 1.0);
}

// GARCH(1,1) Gaussian log-likelihood written out directly; pre-sample sigma^2 = X^2 = mean square.
double oracle_loglik(const std::vector<double>& x, double c0, double b, double a) {
    const double var = mean_square(x);
    double s2_prev = var, x2_prev = var, ll = 0.0;
    for (double v : x) {
        const double s2 = c0 + b * x2_prev + a * s2_prev;
        ll += -0.5 * (std::log(2.0 * std::numbers::pi * s2) + v * v / s2);
        s2_prev = s2;
        x2_prev = v * v;
    }
    return ll;
}

bool within(double est, double se, double truth) { return std::abs(est - truth) <= 3.0 * se; }

}  // namespace

TEST_CASE("GARCH model basics", "[garch]") {
    const auto g = make_garch(0.1, {0.2}, {0.7});
    REQUIRE(g.persistence() == Approx(0.9));
    REQUIRE(g.unconditional_variance() == Approx(1.0));
    REQUIRE(g.free_parameter_count() == 3);
    REQUIRE(g.order_string() == "GARCH(1,1)");
    REQUIRE_FALSE(g.near_integrated_variance);
    REQUIRE(make_garch(0.1, {0.02}, {0.9795}).near_integrated_variance);

    REQUIRE_THROWS_AS(make_garch(0.0, {0.2}, {0.7}), ArgumentError);
    REQUIRE_THROWS_AS(make_garch(0.1, {-0.1}, {0.7}), ArgumentError);
    REQUIRE_THROWS_AS(make_garch(0.1, {0.3}, {0.7}), ArgumentError);
    REQUIRE_THROWS_AS(make_garch(0.1, {}, {0.7}), ArgumentError);
}

TEST_CASE("likelihood and variance recursion match a direct oracle", "[garch]") {
    const auto x = testsupport::garch11(5000, 0.1, 0.2, 0.7, 3);
    const auto g = make_garch(0.1, {0.2}, {0.7});
    REQUIRE(garch_log_likelihood(g, x) == Approx(oracle_loglik(x, 0.1, 0.2, 0.7)).epsilon(1e-12));
    const auto s2 = garch_conditional_variance(g, x);
    REQUIRE(s2.size() == x.size());
    for (double v : s2) REQUIRE(v >= g.c0);
}

TEST_CASE("simulate_garch", "[garch]") {
    SECTION("unconditional variance") {
        const auto x = simulate_garch(make_garch(0.1, {0.2}, {0.7}), 100000, 1);
        REQUIRE(x.size() == 100000);
        REQUIRE(variance(x.values()) == Approx(1.0).margin(0.1));
    }
    SECTION("degenerate recursion is white noise with variance c0") {
        const auto x = simulate_garch(make_garch(2.5, {0.0}, {0.0}), 50000, 2);
        REQUIRE(variance(x.values()) == Approx(2.5).epsilon(0.03));
        REQUIRE_FALSE(arch_lm_test(x).reject_null);
    }
    SECTION("ARCH effect present") {
        int rejected = 0;
        for (int s = 0; s < 20; ++s) rejected += arch_lm_test(simulate_garch(make_garch(0.1, {0.2}, {0.7}), 20000, 10 + s)).reject_null;
        REQUIRE(rejected == 20);
    }
    SECTION("determinism") {
        const auto g = make_garch(0.1, {0.2}, {0.7});
        REQUIRE(simulate_garch(g, 500, 7) == simulate_garch(g, 500, 7));
        REQUIRE_FALSE(simulate_garch(g, 500, 7) == simulate_garch(g, 500, 8));
    }
    SECTION("validation") {
        REQUIRE_THROWS_AS(simulate_garch(make_garch(0.1, {0.2}, {0.7}), 0, 1), ArgumentError);
    }
}

TEST_CASE("fit_garch round trip", "[garch]") {
    int inside = 0, accepted = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const auto x = make(testsupport::garch11(50000, 0.1, 0.2, 0.7, 100 + s));
        const auto f = fit_garch(x, 1, 1);
        const auto& m = f.model;
        REQUIRE(f.converged);
        inside += within(m.c0, m.c0_se, 0.1) && within(m.arch[0], m.arch_se[0], 0.2) &&
                  within(m.garch[0], m.garch_se[0], 0.7);
        accepted += validate_garch(m, f.standardized).accepted();

        // Invariants on every fit.
        REQUIRE(m.c0 > 0.0);
        REQUIRE(m.arch[0] >= 0.0);
        REQUIRE(m.garch[0] >= 0.0);
        REQUIRE(m.persistence() < 1.0);
        REQUIRE(variance(f.standardized.values()) == Approx(1.0).margin(0.05));
        for (double v : f.conditional_variance) REQUIRE(v >= m.c0);
        REQUIRE(m.aic == 2.0 * 3 - 2.0 * m.log_likelihood);
        REQUIRE(m.log_likelihood == Approx(oracle_loglik(x.data(), m.c0, m.arch[0], m.garch[0])).epsilon(1e-12));
        // Nesting: at least as likely as the constant-variance model.
        REQUIRE(m.log_likelihood >= constant_loglik(x.data()));
    }
    REQUIRE(inside >= 19);
    REQUIRE(accepted >= 18);
}

TEST_CASE("fit_garch finds the maximum", "[garch]") {
    const auto x = make(testsupport::garch11(20000, 0.2, 0.1, 0.8, 41));
    const auto f = fit_garch(x, 1, 1);
    const auto& m = f.model;
    // Perturbing any coefficient lowers the likelihood.
    for (int k = 0; k < 3; ++k) {
        for (double h : {-1e-3, 1e-3}) {
            double c0 = m.c0, b = m.arch[0], a = m.garch[0];
            (k == 0 ? c0 : k == 1 ? b : a) += h;
            REQUIRE(oracle_loglik(x.data(), c0, b, a) < m.log_likelihood);
        }
    }
}

TEST_CASE("fit_garch on white noise", "[garch]") {
    int low = 0, no_arch = 0, nested = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const auto x = make(testsupport::gwn(5000, 200 + s, 2.0));
        GarchFit f = [&] {
            try {
                return fit_garch(x, 1, 1);
            } catch (const GarchEstimationError& e) {
                return e.best_so_far();
            }
        }();
        // a_1 is unidentified when b_1 = 0, so only the ARCH part is pinned down.
        low += f.model.arch[0] <= 0.05;
        no_arch += !arch_lm_test(f.standardized).reject_null;
        nested += f.model.log_likelihood >= constant_loglik(x.data()) - 1e-6;
    }
    REQUIRE(no_arch >= 18);
    REQUIRE(nested == seeds);
    REQUIRE(low >= 18);
}

TEST_CASE("validate_garch detects a misspecified variance model", "[garch]") {
    int squared_fail = 0;
    for (int s = 0; s < 10; ++s) {
        const auto x = make(testsupport::garch11(20000, 0.1, 0.2, 0.7, 300 + s));
        // Constant-sigma "model": standardize by the sample standard deviation.
        const double sd = std::sqrt(variance(x.values()));
        std::vector<double> z(x.size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] / sd;
        const auto v = validate_garch(make_garch(sd * sd, {0.0}, {}), make(z));
        squared_fail += v.squared_whiteness.reject_null;
        REQUIRE(v.accepted() == (!v.residual_whiteness.reject_null && !v.squared_whiteness.reject_null));
    }
    REQUIRE(squared_fail == 10);
}

TEST_CASE("select_garch", "[garch]") {
    const auto x = make(testsupport::garch11(30000, 0.1, 0.2, 0.7, 400));
    const auto sel = select_garch(x);
    REQUIRE(sel.candidates.size() == 6);
    REQUIRE(std::is_sorted(sel.candidates.begin(), sel.candidates.end(),
                           [](const auto& a, const auto& b) { return a.aic < b.aic; }));
    REQUIRE_FALSE(sel.selected.model.not_validated);
    REQUIRE(sel.validation.accepted());
    REQUIRE(sel.selected.model.Q >= 1);
    // The ARCH(1) candidates cannot whiten the squares of a persistent GARCH series.
    for (const auto& c : sel.candidates)
        if (c.P == 1 && c.Q == 0) REQUIRE_FALSE(c.accepted);
}

TEST_CASE("GARCH fit validation", "[garch]") {
    const auto x = make(testsupport::gwn(2000, 500));
    REQUIRE_THROWS_AS(fit_garch(x, 0, 1), ArgumentError);
    REQUIRE_THROWS_AS(fit_garch(x, 1, -1), ArgumentError);
    REQUIRE_THROWS_AS(fit_garch(x.head(999), 1, 1), ArgumentError);
    REQUIRE_THROWS_AS(fit_garch(make(std::vector<double>(2000, 1.0)), 1, 1), DegenerateInputError);
}

TEST_CASE("ARIMA driven by GARCH innovations", "[garch][arima]") {
    namespace fs = testsupport::flagship;
    const auto arima = make_arima(fs::phi, fs::d, fs::theta, fs::innovation_variance);
    const auto garch = make_garch(fs::c0, {fs::arch_b1}, {fs::garch_a1});
    const std::size_t n = 20000;
    const auto y = simulate_arima(arima, garch, n, 77);
    REQUIRE(y.size() == n);
    REQUIRE(y == simulate_arima(arima, garch, n, 77));

    // Residuals of the true model reproduce the GARCH innovations once offsets line up.
    const auto e = simulate_garch(garch, n + arima_burn_in(arima), 77);
    const auto r = arima_residuals(arima, y);
    const std::size_t offset = arima_burn_in(arima) + fs::d + 5;
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 2000; i < r.size(); ++i) {
        worst = std::max(worst, std::abs(r[i] - e[i + offset]));
        scale = std::max(scale, std::abs(e[i + offset]));
    }
    REQUIRE(worst < 1e-6 * scale);
}

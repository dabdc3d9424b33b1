#include <catch_amalgamated.hpp>

#include "seisnoise/errors.hpp"
#include "seisnoise/stat_tests.hpp"
#include "support/simulate.hpp"

#include <cmath>
#include <random>

using namespace seisnoise;
using Catch::Approx;

namespace {

Series make(std::vector<double> v) { return Series(std::move(v), 20.0); }

void check_consistent(const TestOutcome& t) {
    REQUIRE(t.reject_null == t.decision_from_critical());
    if (t.p_value) {
        REQUIRE(*t.p_value >= 0.0);
        REQUIRE(*t.p_value <= 1.0);
        REQUIRE(t.reject_null == (*t.p_value < t.alpha));
    }
}

std::vector<double> variance_step(std::size_t n, std::uint64_t seed) {
    auto x = testsupport::gwn(n, seed);
    for (std::size_t i = n / 2; i < n; ++i) x[i] *= 2.0;
    return x;
}

std::vector<double> arch1(std::size_t n, double c0, double b, std::uint64_t seed) {
    return testsupport::garch11(n, c0, b, 0.0, seed);
}

}  // namespace

TEST_CASE("Dickey-Fuller distribution helpers", "[unit_root]") {
    REQUIRE(schwert_lag_order(100) == 12);
    REQUIRE(schwert_lag_order(5000) == 31);
    REQUIRE(newey_west_bandwidth(100) == 4);
    REQUIRE(newey_west_bandwidth(5000) == 10);

    // Critical values from the p-value surfaces agree with the finite-sample
    // response surfaces at large N.
    for (auto det : {Deterministic::none, Deterministic::drift, Deterministic::trend}) {
        for (double level : {0.01, 0.05, 0.10}) {
            const double crit = dickey_fuller_critical(det, level);
            REQUIRE(dickey_fuller_pvalue(crit, det) == Approx(level).margin(1e-6));
            REQUIRE(crit == Approx(dickey_fuller_table_critical(det, level, 100000)).margin(0.03));
        }
    }
    REQUIRE(dickey_fuller_critical(Deterministic::trend, 0.05) == Approx(-3.41).margin(0.01));
    REQUIRE(dickey_fuller_critical(Deterministic::none, 0.05) == Approx(-1.94).margin(0.01));
    // Table-3 style value: tau = -2.70 with a trend cannot reject.
    REQUIRE(dickey_fuller_pvalue(-2.70, Deterministic::trend) == Approx(0.236).margin(0.01));
    REQUIRE(dickey_fuller_pvalue(-27.45, Deterministic::none) == 0.0);

    double prev = 0.0;
    for (double tau = -20.0; tau < 3.0; tau += 0.05) {
        const double p = dickey_fuller_pvalue(tau, Deterministic::drift);
        REQUIRE(p >= prev - 1e-12);
        prev = p;
    }
    REQUIRE_THROWS_AS(dickey_fuller_table_critical(Deterministic::none, 0.02, 100), ArgumentError);
}

TEST_CASE("ADF and PP input validation", "[unit_root]") {
    REQUIRE_THROWS_AS(adf_test(make(testsupport::gwn(49, 1))), ArgumentError);
    REQUIRE_THROWS_AS(pp_test(make(testsupport::gwn(49, 1))), ArgumentError);
    REQUIRE_THROWS_AS(adf_test(make(std::vector<double>(200, 1.0))), DegenerateInputError);
    REQUIRE_THROWS_AS(pp_test(make(std::vector<double>(200, 1.0))), DegenerateInputError);
    REQUIRE_THROWS_AS(ar1_coefficient(make(std::vector<double>(200, 1.0))), DegenerateInputError);
    REQUIRE_THROWS_AS(ar1_coefficient(make(testsupport::gwn(99, 1))), ArgumentError);
    UnitRootConfig bad;
    bad.lag_order = -1;
    REQUIRE_THROWS_AS(adf_test(make(testsupport::gwn(200, 1)), bad), ArgumentError);
}

TEST_CASE("ADF size and power", "[unit_root][montecarlo]") {
    int rw_reject = 0, ar_reject = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto rw = adf_test(make(testsupport::random_walk(5000, 10 + seed)));
        const auto ar = adf_test(make(testsupport::ar1(5000, 0.5, 500 + seed)));
        check_consistent(rw);
        check_consistent(ar);
        REQUIRE(rw.details.at("lag_order") == 31);
        rw_reject += rw.reject_null;
        ar_reject += ar.reject_null;
    }
    REQUIRE(rw_reject <= 10);
    REQUIRE(ar_reject >= 99);
}

TEST_CASE("PP size and power", "[unit_root][montecarlo]") {
    int rw_reject = 0, ar_reject = 0, garch_rw_reject = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        rw_reject += pp_test(make(testsupport::random_walk(5000, 10 + seed))).reject_null;
        ar_reject += pp_test(make(testsupport::ar1(5000, 0.5, 500 + seed))).reject_null;
        const auto g = testsupport::cumsum(testsupport::garch11(5000, 0.31, 0.019, 0.98, 900 + seed));
        const auto out = pp_test(make(g));
        check_consistent(out);
        garch_rw_reject += out.reject_null;
    }
    REQUIRE(rw_reject <= 10);
    REQUIRE(ar_reject >= 99);
    // Heavy-tailed volatility clustering may inflate false rejections; it must
    // still not look like a stationary series.
    REQUIRE(garch_rw_reject <= 30);
    WARN("PP rejection rate on GARCH-driven random walks: " << garch_rw_reject << "/100");
}

TEST_CASE("PP on a differenced random walk rejects decisively", "[unit_root]") {
    const auto d = pp_test(make(testsupport::gwn(20000, 3)), {.deterministic = Deterministic::none});
    REQUIRE(d.reject_null);
    REQUIRE(d.statistic < -20.0);
    REQUIRE(*d.p_value == Approx(0.0).margin(1e-6));
}

TEST_CASE("ar1_coefficient", "[unit_root]") {
    REQUIRE(ar1_coefficient(make(testsupport::random_walk(50000, 17))) >= 0.999);
    const std::size_t n = 10000;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        REQUIRE(std::abs(ar1_coefficient(make(testsupport::gwn(n, seed)))) <= 3.0 / std::sqrt(double(n)));
    }
    REQUIRE(ar1_coefficient(make(testsupport::ar1(50000, 0.5, 3))) == Approx(0.5).margin(0.02));
    // Double integration of white noise looks integrated at every stage but the last.
    const auto i2 = testsupport::cumsum(testsupport::random_walk(50000, 2));
    REQUIRE(ar1_coefficient(make(i2)) > kIntegratingAr1Threshold);
}

TEST_CASE("ARCH LM test", "[arch_lm]") {
    REQUIRE_THROWS_AS(arch_lm_test(make(std::vector<double>(500, 3.0))), DegenerateInputError);
    REQUIRE_THROWS_AS(arch_lm_test(make(testsupport::gwn(500, 1)), 0), ArgumentError);

    int size_rejects = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto t = arch_lm_test(make(testsupport::gwn(5000, 2000 + seed)));
        check_consistent(t);
        size_rejects += t.reject_null;
    }
    REQUIRE(size_rejects / 200.0 == Approx(0.05).margin(0.03));

    int power = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) power += arch_lm_test(make(arch1(5000, 1.0, 0.5, seed))).reject_null;
    REQUIRE(power >= 99);

    const auto lm = arch_lm_test(make(testsupport::gwn(1000, 1)), 3);
    REQUIRE(lm.details.at("lags") == 3);
    REQUIRE(*lm.critical_upper == Approx(7.8147).margin(1e-3));

    // Scale invariance: multiplying the series by a constant leaves N R^2 unchanged.
    auto x = arch1(2000, 1.0, 0.3, 5);
    const double s1 = arch_lm_test(make(x)).statistic;
    for (auto& v : x) v *= 1234.5;
    REQUIRE(arch_lm_test(make(x)).statistic == Approx(s1).epsilon(1e-8));
}

TEST_CASE("Shapiro-Wilk weights", "[shapiro_wilk]") {
    for (std::size_t n : {3u, 4u, 5u, 6u, 11u, 12u, 50u, 2000u, 5000u}) {
        const auto w = shapiro_wilk_weights(n);
        REQUIRE(w.sample_size == n);
        double ss = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            REQUIRE(w.coefficients[j] == Approx(-w.coefficients[n - 1 - j]).margin(1e-15));
            ss += w.coefficients[j] * w.coefficients[j];
        }
        REQUIRE(ss == Approx(1.0).margin(1e-6));
    }
    REQUIRE_THROWS_AS(shapiro_wilk_weights(2), ArgumentError);
    REQUIRE_THROWS_AS(shapiro_wilk_weights(5001), ArgumentError);
}

TEST_CASE("Shapiro-Wilk against reference values", "[shapiro_wilk]") {
    // Reference W and p from an independent implementation of the same algorithm.
    std::vector<double> x;
    for (int i = 1; i <= 20; ++i) x.push_back(std::pow(i, 1.5));
    auto t = shapiro_wilk(make(x));
    REQUIRE(t.statistic == Approx(0.9386387827100082).margin(1e-6));
    REQUIRE(*t.p_value == Approx(0.22595959591595688).margin(1e-4));
    check_consistent(t);

    t = shapiro_wilk(make({2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.1, 3.9, 3.0}));
    REQUIRE(t.statistic == Approx(0.9713906031045022).margin(1e-6));
    REQUIRE(*t.p_value == Approx(0.9034305013349915).margin(1e-4));

    t = shapiro_wilk(make({1.0, 2.0, 4.0}));
    REQUIRE(t.statistic == Approx(0.9642857142857142).margin(1e-9));
    REQUIRE(*t.p_value == Approx(0.6368868450289689).margin(1e-4));

    REQUIRE_THROWS_AS(shapiro_wilk(make(std::vector<double>(10, 1.0))), DegenerateInputError);
    REQUIRE_THROWS_AS(shapiro_wilk(make({1.0, 2.0})), ArgumentError);
}

TEST_CASE("Shapiro-Wilk critical W matches the p-value boundary", "[shapiro_wilk]") {
    for (std::size_t n : {3u, 7u, 11u, 12u, 100u, 2000u}) {
        const double w = shapiro_wilk_critical_w(n, 0.05);
        REQUIRE(w > 0.0);
        REQUIRE(w < 1.0);
    }
    REQUIRE(shapiro_wilk_critical_w(100, 0.05) < shapiro_wilk_critical_w(2000, 0.05));
    REQUIRE(shapiro_wilk_critical_w(2000, 0.01) < shapiro_wilk_critical_w(2000, 0.05));
}

TEST_CASE("Shapiro-Wilk size, power and invariance", "[shapiro_wilk][montecarlo]") {
    int size_rejects = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto t = shapiro_wilk(make(testsupport::gwn(2000, 7000 + seed)));
        check_consistent(t);
        REQUIRE(t.statistic > 0.0);
        REQUIRE(t.statistic <= 1.0);
        size_rejects += t.reject_null;
    }
    REQUIRE(size_rejects / 200.0 == Approx(0.05).margin(0.03));

    int power = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<double> v(2000);
        for (auto& e : v) e = u(rng);
        power += shapiro_wilk(make(v)).reject_null;
    }
    REQUIRE(power >= 99);

    auto v = testsupport::gwn(500, 4);
    const double w0 = shapiro_wilk(make(v)).statistic;
    for (auto& e : v) e = 3.0 * e - 7.0;
    REQUIRE(shapiro_wilk(make(v)).statistic == Approx(w0).epsilon(1e-12));
}

TEST_CASE("whiteness test", "[whiteness]") {
    // With 50 lags at most 3 may leave the band; Binomial(50, 0.05) keeps 76% of its mass there.
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = whiteness_test(make(testsupport::gwn(50000, 60 + seed)), 50);
        check_consistent(g);
        REQUIRE(g.details.at("ljung_box_p") > 0.0);
        passes += !g.reject_null;
    }
    REQUIRE(passes >= 30);

    const auto a = whiteness_test(make(testsupport::ar1(50000, 0.3, 5)), 50);
    REQUIRE(a.reject_null);

    // GARCH noise is uncorrelated but its ACF variance exceeds 1/N; the robust band accounts for it.
    const auto gx = testsupport::garch11(50000, 0.31, 0.019, 0.98, 8);
    const auto robust = whiteness_test(make(gx), 500, 0.05, WhitenessBand::robust);
    REQUIRE_FALSE(robust.reject_null);
    REQUIRE(robust.details.at("mean_band") > 1.96 / std::sqrt(50000.0));

    REQUIRE(default_whiteness_lags(50000) == 500);
    REQUIRE(default_whiteness_lags(2000) == 200);
    REQUIRE_THROWS_AS(whiteness_test(make(testsupport::gwn(5000, 1)), 9), ArgumentError);
    REQUIRE_THROWS_AS(whiteness_test(make(testsupport::gwn(400, 1)), 50), ArgumentError);
}

TEST_CASE("whiteness test false-alarm rate with many lags", "[whiteness][montecarlo]") {
    int rejects = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        rejects += whiteness_test(make(testsupport::gwn(20000, 40 + seed)), default_whiteness_lags(20000)).reject_null;
    }
    REQUIRE(rejects <= 5);
}

TEST_CASE("PSR test structure", "[psr]") {
    const auto out = psr_test(make(testsupport::gwn(50000, 1)));
    REQUIRE(out.n_time_blocks == 15);
    REQUIRE(out.n_freq_points == 16);
    REQUIRE(out.t_component.details.at("dof") == 14);
    REQUIRE(out.ir_component.details.at("dof") == 14 * 15);
    REQUIRE(out.tir_component.details.at("dof") == 14 + 14 * 15);
    REQUIRE(out.tir_component.statistic == Approx(out.t_component.statistic + out.ir_component.statistic));
    REQUIRE(out.log_spectrum.size() == 15);
    REQUIRE(out.frequencies.size() == 16);
    REQUIRE(out.frequencies.back() < 10.0);
    for (const auto* c : {&out.t_component, &out.ir_component, &out.tir_component}) check_consistent(*c);
    REQUIRE(out.reject_null() ==
            (out.t_component.reject_null || out.ir_component.reject_null || out.tir_component.reject_null));

    REQUIRE_THROWS_AS(psr_test(make(testsupport::gwn(4095, 1))), ArgumentError);
    REQUIRE_THROWS_AS(psr_test(make(testsupport::gwn(5000, 1)), 15, 16), ArgumentError);
    REQUIRE_THROWS_AS(psr_test(make(testsupport::gwn(50000, 1)), 1, 16), ArgumentError);
}

TEST_CASE("PSR size and power", "[psr][montecarlo]") {
    int gwn_rejects = 0, ar_rejects = 0, step_rejects = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        gwn_rejects += psr_test(make(testsupport::gwn(50000, 3000 + seed))).reject_null();
        // Coloured but stationary: the log-spectrum shape varies in frequency only.
        ar_rejects += psr_test(make(testsupport::ar1(50000, 0.7, 4000 + seed))).reject_null();
        step_rejects += psr_test(make(variance_step(50000, 5000 + seed))).reject_null();
    }
    REQUIRE(gwn_rejects <= 10);
    REQUIRE(ar_rejects <= 12);
    REQUIRE(step_rejects >= 99);
}

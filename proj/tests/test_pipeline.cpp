#include <catch_amalgamated.hpp>

#include "seisnoise/errors.hpp"
#include "seisnoise/io.hpp"
#include "seisnoise/pipeline.hpp"
#include "seisnoise/synth.hpp"
#include "support/flagship.hpp"

#include <algorithm>

using namespace seisnoise;

namespace {

PipelineConfig quick_config() {
    PipelineConfig cfg;
    cfg.n_samples = 8192;
    cfg.p_max = 3;
    cfg.m_max = 2;
    cfg.threads = 1;
    return cfg;
}

Series gwn(std::size_t n, std::uint64_t seed) {
    ProcessSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.sample_rate = 20.0;
    return generate(spec);
}

Series flagship(std::size_t n, std::uint64_t seed) {
    namespace fs = testsupport::flagship;
    ProcessSpec spec;
    spec.kind = ProcessKind::arima_garch;
    spec.n = n;
    spec.seed = seed;
    spec.sample_rate = 20.0;
    spec.arima = make_arima(fs::phi, fs::d, fs::theta, fs::innovation_variance);
    spec.garch = make_garch(fs::c0, {fs::arch_b1}, {fs::garch_a1});
    return generate(spec);
}

std::vector<std::string> stage_names(const CharacterizationReport& r) {
    std::vector<std::string> out;
    for (const auto& e : r.stage_log) out.push_back(e.stage);
    return out;
}

// Invariants every complete report satisfies.
void check_report(const CharacterizationReport& r) {
    REQUIRE(r.complete);
    REQUIRE(r.garch.has_value() == r.arch_effect);
    REQUIRE(r.diagnostics.difference_passes == r.integration_order);
    REQUIRE(r.arima->d == r.integration_order);
    REQUIRE(stage_names(r) ==
            std::vector<std::string>{"determine_d", "psr", "linearity", "arima", "gaussianity", "residual_tests", "garch"});

    for (const char* t : {"psr_differenced_t", "psr_differenced_ir", "psr_differenced_tir"}) REQUIRE(r.tests.count(t));
    const bool psr = r.tests.at("psr_differenced_t").reject_null || r.tests.at("psr_differenced_ir").reject_null ||
                     r.tests.at("psr_differenced_tir").reject_null;
    REQUIRE(r.heteroskedastic == psr);
    REQUIRE(r.linear == !r.tests.at("linearity").reject_null);
    REQUIRE(r.arch_effect == r.tests.at("arch_lm").reject_null);
    const auto& sw = r.garch ? r.tests.at("shapiro_wilk_standardized") : r.tests.at("shapiro_wilk");
    REQUIRE(r.gaussian == !sw.reject_null);
    REQUIRE(r.tests.count("shapiro_wilk"));
    REQUIRE(r.tests.count("residual_whiteness"));
    REQUIRE(r.tests.count("squared_residual_whiteness"));
    REQUIRE(r.tests.count("garch_residual_whiteness") == (r.garch ? 1u : 0u));
    REQUIRE(r.diagnostics.sw_count == std::min<std::size_t>(r.config.sw_sample, r.input.n_analyzed));
}

}  // namespace

TEST_CASE("config validation", "[pipeline]") {
    REQUIRE_NOTHROW(PipelineConfig{}.validate());
    auto bad = [](auto mutate) {
        PipelineConfig c;
        mutate(c);
        REQUIRE_THROWS_AS(c.validate(), ArgumentError);
        REQUIRE_THROWS_AS(characterize(gwn(100, 1), c), ArgumentError);
    };
    bad([](PipelineConfig& c) { c.alpha = 0.0; });
    bad([](PipelineConfig& c) { c.alpha = 1.0; });
    bad([](PipelineConfig& c) { c.sw_sample = 5001; });
    bad([](PipelineConfig& c) { c.d_max = 4; });
    bad([](PipelineConfig& c) { c.n_surrogates = 10; });
    bad([](PipelineConfig& c) { c.garch_P = {0}; });
    bad([](PipelineConfig& c) { c.garch_Q = {}; });
}

TEST_CASE("white noise is the null process", "[pipeline]") {
    const auto r = characterize(gwn(50000, 11));
    check_report(r);
    REQUIRE(r.integration_order == 0);
    REQUIRE_FALSE(r.heteroskedastic);
    REQUIRE(r.linear);
    REQUIRE(r.gaussian);
    REQUIRE_FALSE(r.arch_effect);
    REQUIRE(r.arima->order_string() == "ARIMA(0,0,0)");
    REQUIRE_FALSE(r.garch);
    REQUIRE(r.stage_log.back().summary == "skipped (no ARCH effect)");
    REQUIRE(r.input.n_analyzed == 50000);
    REQUIRE(r.input.sample_rate == 20.0);
    REQUIRE(r.warnings.empty());
}

TEST_CASE("reports are deterministic", "[pipeline]") {
    const auto s = flagship(8192, 3);
    const auto a = characterize(s, quick_config());
    const auto b = characterize(s, quick_config());
    check_report(a);
    REQUIRE(report_to_json(a) == report_to_json(b));
    auto cfg = quick_config();
    cfg.seed = 1;
    REQUIRE(report_to_json(characterize(s, cfg)) != report_to_json(a));
}

TEST_CASE("analysis window and plot data", "[pipeline]") {
    auto cfg = quick_config();
    const auto r = characterize(gwn(10000, 4), cfg);
    REQUIRE(r.input.n_input == 10000);
    REQUIRE(r.input.n_analyzed == 8192);
    REQUIRE(r.warnings.empty());
    for (const char* key : {"acf_raw", "pacf_raw", "periodogram_raw", "acf_d1", "pacf_d1", "periodogram_d1", "acf_d2",
                            "pacf_d2", "periodogram_d2", "acf_residuals", "acf_squared_residuals"})
        REQUIRE(r.plots.count(key));
    REQUIRE(r.plots.at("acf_raw").y.front() == 1.0);

    cfg.n_samples = 20000;
    const auto shorter = characterize(gwn(10000, 4), cfg);
    REQUIRE(shorter.input.n_analyzed == 10000);
    REQUIRE(shorter.warnings.size() == 1);
}

TEST_CASE("stage failures give a partial report", "[pipeline]") {
    SECTION("too short for the evolutionary-spectrum test") {
        const auto r = characterize(gwn(2000, 5), quick_config());
        REQUIRE_FALSE(r.complete);
        REQUIRE(r.failure.rfind("psr:", 0) == 0);
        REQUIRE(r.stage_log.front().stage == "determine_d");
        REQUIRE(r.stage_log.back().summary.rfind("aborted", 0) == 0);
        REQUIRE_FALSE(r.arima);
    }
    SECTION("constant series") {
        const auto r = characterize(Series(std::vector<double>(8192, 3.0), 1.0), quick_config());
        REQUIRE_FALSE(r.complete);
        REQUIRE_FALSE(r.failure.empty());
    }
}

TEST_CASE("flagship ARIMA(5,2,3)-GARCH(1,1) single run", "[pipeline][slow]") {
    const auto r = characterize(flagship(50000, 0));
    check_report(r);
    REQUIRE(r.integration_order == 2);
    REQUIRE(r.heteroskedastic);
    REQUIRE(r.arch_effect);
    REQUIRE(r.gaussian);
    REQUIRE_FALSE(r.tests.at("residual_whiteness").reject_null);
    REQUIRE_FALSE(r.tests.at("garch_residual_whiteness").reject_null);
    REQUIRE_FALSE(r.tests.at("garch_squared_whiteness").reject_null);
    REQUIRE(r.arima->p == 5);
    REQUIRE(r.arima->m == 3);
}

TEST_CASE("batch characterization", "[pipeline][slow]") {
    std::vector<Series> inputs;
    for (std::uint64_t s = 0; s < 10; ++s) inputs.push_back(gwn(8192, 100 + s));
    for (std::uint64_t s = 0; s < 10; ++s) inputs.push_back(flagship(8192, 200 + s));
    auto cfg = quick_config();
    cfg.p_max = 5;
    cfg.m_max = 3;
    cfg.garch_P = {1};
    cfg.garch_Q = {1};
    const auto res = batch_characterize(inputs, cfg, 1);
    REQUIRE(res.entries.size() == 20);
    REQUIRE(res.entries[3].label == "input3");
    for (const auto& e : res.entries) {
        REQUIRE(e.error.empty());
        check_report(*e.report);
    }

    const std::vector<BatchEntry> noise(res.entries.begin(), res.entries.begin() + 10);
    const std::vector<BatchEntry> i2(res.entries.begin() + 10, res.entries.end());
    const auto sn = summarize(noise);
    REQUIRE(sn.pct_integrating == 0.0);
    REQUIRE(sn.pct_arch == 0.0);
    const auto s2 = summarize(i2);
    REQUIRE(s2.pct_by_order.count(2));
    REQUIRE(s2.pct_by_order.at(2) >= 80.0);
    REQUIRE(s2.pct_arch >= 90.0);

    std::vector<BatchEntry> mixed(noise.begin(), noise.begin() + 5);
    mixed.insert(mixed.end(), i2.begin(), i2.begin() + 5);
    const auto sm = summarize(mixed);
    REQUIRE(std::abs(sm.pct_integrating - 50.0) <= 10.0);
    REQUIRE(std::abs(sm.pct_arch - 50.0) <= 10.0);
    REQUIRE(sm.trajectory.size() == 10);
    REQUIRE(sm.trajectory[7].index == 7);
}

TEST_CASE("batch records failures and continues", "[pipeline]") {
    const std::vector<Series> inputs{gwn(8192, 1), gwn(1000, 2), gwn(8192, 3)};
    const auto res = batch_characterize(inputs, quick_config(), 2, {"a", "short", "c"});
    REQUIRE(res.summary.total == 3);
    REQUIRE(res.summary.succeeded == 2);
    REQUIRE(res.summary.failed == 1);
    REQUIRE_FALSE(res.entries[1].error.empty());
    REQUIRE(res.entries[1].label == "short");
    REQUIRE(res.entries[0].error.empty());
    REQUIRE(res.entries[2].error.empty());
    REQUIRE_THROWS_AS(batch_characterize({}, quick_config()), ArgumentError);
    REQUIRE_THROWS_AS(batch_characterize(inputs, quick_config(), 1, {"x"}), ArgumentError);
}

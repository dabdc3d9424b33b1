#include "seisnoise/pipeline.hpp"

#include "parallel.hpp"
#include "seisnoise/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace seisnoise {

namespace {

constexpr std::size_t kPlotLags = 100;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void add_psr(CharacterizationReport& r, const std::string& prefix, const PsrOutcome& o) {
    r.tests[prefix + "_t"] = o.t_component;
    r.tests[prefix + "_ir"] = o.ir_component;
    r.tests[prefix + "_tir"] = o.tir_component;
}

void add_correlation_plot(CharacterizationReport& r, const std::string& key, const CorrelationSequence& c,
                          const std::string& what) {
    PlotSeries p{"lag (samples)", what, {}, {}};
    for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
        p.x.push_back(static_cast<double>(c.lags[i]));
        p.y.push_back(c.coefficients[i]);
    }
    r.plots[key] = std::move(p);
}

void add_series_plots(CharacterizationReport& r, const Series& x, const std::string& suffix) {
    if (x.size() < 30) return;
    const std::size_t lags = std::min(kPlotLags, x.size() - 1);
    add_correlation_plot(r, "acf_" + suffix, acf(x, lags), "autocorrelation");
    add_correlation_plot(r, "pacf_" + suffix, pacf(x, lags), "partial autocorrelation");
    if (x.size() >= 64) {
        const auto sp = periodogram(x);
        r.plots["periodogram_" + suffix] = PlotSeries{"frequency (Hz)", "power (units^2/Hz)", sp.frequencies, sp.power};
    }
}

double fraction_outside(const CorrelationSequence& c) {
    if (c.coefficients.size() < 2) return 0.0;
    std::size_t out = 0;
    for (std::size_t k = 1; k < c.coefficients.size(); ++k) out += std::abs(c.coefficients[k]) > c.confidence_band;
    return static_cast<double>(out) / static_cast<double>(c.coefficients.size() - 1);
}

std::string verdict(bool reject) { return reject ? "reject" : "fail to reject"; }

void log(CharacterizationReport& r, std::string stage, std::string summary) {
    r.stage_log.push_back({std::move(stage), std::move(summary)});
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    if (n_samples < 1) throw ArgumentError("n_samples must be >= 1");
    if (n_surrogates < 19) throw ArgumentError("n_surrogates must be >= 19");
    if (sw_sample < 3 || sw_sample > 5000) throw ArgumentError("sw_sample must lie in [3, 5000]");
    if (d_max < 0 || d_max > 3) throw ArgumentError("d_max must lie in [0, 3]");
    if (p_max < 0 || m_max < 0) throw ArgumentError("order sweep bounds must be nonnegative");
    if (garch_P.empty() || garch_Q.empty()) throw ArgumentError("GARCH order sweep must be nonempty");
    for (int v : garch_P)
        if (v < 1) throw ArgumentError("GARCH P values must be >= 1");
    for (int v : garch_Q)
        if (v < 0) throw ArgumentError("GARCH Q values must be >= 0");
    if (arch_lags < 1) throw ArgumentError("arch_lags must be >= 1");
    if (embedding.dimension < 1) throw ArgumentError("embedding dimension must be >= 1");
}

CharacterizationReport characterize(const Series& s, const PipelineConfig& cfg) {
    cfg.validate();
    CharacterizationReport r;
    r.config = cfg;
    r.input.meta = s.meta();
    auto src = s.meta().find("source");
    r.input.source = src != s.meta().end() ? src->second : "memory";
    r.input.sample_rate = s.sample_rate();
    r.input.n_input = s.size();
    if (s.size() < cfg.n_samples)
        r.warnings.push_back("series has " + std::to_string(s.size()) + " samples, fewer than n_samples; using all of them");
    const Series x = s.head(cfg.n_samples);
    r.input.n_analyzed = x.size();

    std::string stage = "plots";
    try {
        for (int k = 0; k <= 2 && static_cast<std::size_t>(k) + 30 <= x.size(); ++k)
            add_series_plots(r, k == 0 ? x : difference(x, k), k == 0 ? "raw" : "d" + std::to_string(k));

        // (1) order of integration
        stage = "determine_d";
        DifferencingPolicy policy;
        policy.ar1_verification = cfg.ar1_verification;
        const auto io = determine_d(x, cfg.alpha, cfg.d_max, policy);
        r.integration_order = io.d;
        r.diagnostics.integration_stages = io.stages;
        r.diagnostics.still_integrating = io.still_integrating;
        for (const auto& st : io.stages) {
            if (st.adf) r.tests["adf_d" + std::to_string(st.d)] = *st.adf;
            if (st.pp) r.tests["pp_d" + std::to_string(st.d)] = *st.pp;
        }
        if (io.still_integrating) r.warnings.push_back("integrating effect remains at d_max");
        {
            std::string sum = "d=" + std::to_string(io.d);
            for (const auto& st : io.stages)
                sum += "; d" + std::to_string(st.d) + " " + st.method + " ar1=" + fmt("%.4f", st.ar1) +
                       (st.integrating ? " integrating" : " stationary");
            log(r, stage, sum);
        }

        const Series w = difference(x, io.d);
        r.diagnostics.difference_passes = io.d;

        // (2) evolutionary-spectrum test on the data and the stationarized series
        stage = "psr";
        const auto psr_data = psr_test(x, cfg.alpha);
        add_psr(r, "psr_data", psr_data);
        const auto psr_diff = io.d == 0 ? psr_data : psr_test(w, cfg.alpha);
        add_psr(r, "psr_differenced", psr_diff);
        r.heteroskedastic = psr_diff.reject_null();
        log(r, stage,
            "data " + verdict(psr_data.reject_null()) + ", differenced " + verdict(psr_diff.reject_null()) +
                (r.heteroskedastic ? " (heteroskedastic)" : " (homoskedastic)"));

        // (3) linearity of the stationarized series
        stage = "linearity";
        LinearityOptions lo;
        lo.n_surrogates = cfg.n_surrogates;
        lo.embedding = cfg.embedding;
        lo.seed = cfg.seed;
        lo.alpha = cfg.alpha;
        lo.threads = cfg.threads;
        const auto lin = linearity_test(w, lo);
        r.tests["linearity"] = lin.outcome;
        r.linear = !lin.outcome.reject_null;
        r.diagnostics.linearity_d2 = lin.data_estimate.d2;
        r.diagnostics.surrogate_d2 = lin.surrogate_d2;
        if (!r.linear) r.warnings.push_back("series tested nonlinear; the ARIMA-GARCH model is a linear approximation");
        log(r, stage, "D2=" + fmt("%.4g", lin.data_estimate.d2) + ", " + (r.linear ? "linear" : "nonlinear"));

        // (4) ARIMA order selection at the determined d
        stage = "arima";
        OrderSelectionOptions oo;
        oo.p_max = cfg.p_max;
        oo.m_max = cfg.m_max;
        oo.alpha = cfg.alpha;
        oo.threads = cfg.threads;
        oo.fit.alpha = cfg.alpha;
        const auto sel = select_order(x, io.d, oo);
        r.arima = sel.selected.model;
        r.diagnostics.order_candidates = sel.candidates;
        r.diagnostics.order_reductions = sel.reductions;
        r.diagnostics.insignificant_params = sel.selected.diagnostics.insignificant_params;
        r.diagnostics.arima_converged = sel.selected.diagnostics.converged;
        r.tests["residual_whiteness"] = sel.selected.diagnostics.whiteness;
        if (r.arima->not_validated) r.warnings.push_back("no ARIMA candidate passed validation; best-AIC fit reported");
        log(r, stage,
            r.arima->order_string() + ", AIC=" + fmt("%.6g", r.arima->aic) + ", residuals " +
                (sel.selected.diagnostics.whiteness.reject_null ? "not white" : "white"));

        const Series& e = sel.selected.diagnostics.residuals;

        // (5) Gaussianity of the pre-whitened data
        stage = "gaussianity";
        r.diagnostics.sw_offset = 0;
        r.diagnostics.sw_count = std::min(cfg.sw_sample, e.size());
        const auto sw = shapiro_wilk(e.head(cfg.sw_sample), cfg.alpha);
        r.tests["shapiro_wilk"] = sw;
        r.gaussian = !sw.reject_null;
        log(r, stage, "W=" + fmt("%.5f", sw.statistic) + " on " + std::to_string(r.diagnostics.sw_count) + " residuals, " +
                          (r.gaussian ? "Gaussian" : "non-Gaussian"));

        // (6) heteroskedasticity of the pre-whitened data
        stage = "residual_tests";
        add_psr(r, "psr_residuals", psr_test(e, cfg.alpha));
        const auto lm = arch_lm_test(e, cfg.arch_lags, cfg.alpha);
        r.tests["arch_lm"] = lm;
        r.arch_effect = lm.reject_null;
        std::vector<double> sq(e.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = e[i] * e[i];
        const int lags = default_whiteness_lags(sq.size());
        r.tests["squared_residual_whiteness"] = whiteness_test(sq, lags, cfg.alpha);
        const auto sq_acf = acf(std::span<const double>(sq), std::min(kPlotLags, sq.size() - 1));
        r.diagnostics.squared_residual_acf_outside = fraction_outside(sq_acf);
        add_correlation_plot(r, "acf_residuals", acf(e, std::min(kPlotLags, e.size() - 1)), "autocorrelation");
        add_correlation_plot(r, "acf_squared_residuals", sq_acf, "autocorrelation");
        log(r, stage, "ARCH LM " + verdict(lm.reject_null) + (r.arch_effect ? " (ARCH effect)" : " (no ARCH effect)"));

        // (7) conditional variance model
        stage = "garch";
        if (r.arch_effect) {
            GarchSweepOptions go;
            go.P_values = cfg.garch_P;
            go.Q_values = cfg.garch_Q;
            go.alpha = cfg.alpha;
            go.threads = cfg.threads;
            const auto gs = select_garch(e, go);
            r.garch = gs.selected.model;
            r.diagnostics.garch_candidates = gs.candidates;
            r.tests["garch_residual_whiteness"] = gs.validation.residual_whiteness;
            r.tests["garch_squared_whiteness"] = gs.validation.squared_whiteness;
            if (r.garch->not_validated) r.warnings.push_back("no GARCH candidate passed validation; best-AIC fit reported");
            // With conditional heteroskedasticity the residuals are a variance mixture; the
            // Gaussianity verdict moves to the GARCH-standardized residuals.
            const auto swz = shapiro_wilk(gs.selected.standardized.head(cfg.sw_sample), cfg.alpha);
            r.tests["shapiro_wilk_standardized"] = swz;
            r.gaussian = !swz.reject_null;
            log(r, stage,
                r.garch->order_string() + ", persistence=" + fmt("%.4f", r.garch->persistence()) +
                    (gs.validation.accepted() ? ", validated" : ", not validated") + "; standardized W=" +
                    fmt("%.5f", swz.statistic) + ", " + (r.gaussian ? "Gaussian" : "non-Gaussian"));
        } else {
            log(r, stage, "skipped (no ARCH effect)");
        }
        r.complete = true;
    } catch (const DegenerateInputError& ex) {
        r.failure = stage + ": " + ex.what();
    } catch (const EstimationError& ex) {
        r.failure = stage + ": " + ex.what();
    } catch (const ArgumentError& ex) {
        r.failure = stage + ": " + ex.what();
    }
    if (!r.complete) log(r, stage, "aborted: " + r.failure);
    return r;
}

BatchSummary summarize(const std::vector<BatchEntry>& entries) {
    BatchSummary sum;
    sum.total = entries.size();
    std::size_t integ = 0, het = 0, nonlin = 0, gauss = 0, arch = 0;
    std::map<int, std::size_t> by_order;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (!e.report || !e.report->complete) {
            ++sum.failed;
            continue;
        }
        const auto& r = *e.report;
        ++sum.succeeded;
        integ += r.integration_order > 0;
        het += r.heteroskedastic;
        nonlin += !r.linear;
        gauss += r.gaussian;
        arch += r.arch_effect;
        ++by_order[r.integration_order];
        if (r.arima)
            sum.trajectory.push_back(
                {i, r.arima->order_string(), r.arima->ar, r.arima->ma, r.arima->innovation_variance, r.arima->aic});
    }
    if (sum.succeeded > 0) {
        const double n = static_cast<double>(sum.succeeded);
        auto pct = [n](std::size_t c) { return 100.0 * static_cast<double>(c) / n; };
        sum.pct_integrating = pct(integ);
        sum.pct_heteroskedastic = pct(het);
        sum.pct_nonlinear = pct(nonlin);
        sum.pct_gaussian = pct(gauss);
        sum.pct_arch = pct(arch);
        for (const auto& [d, c] : by_order) sum.pct_by_order[d] = pct(c);
    }
    return sum;
}

BatchResult batch_characterize(const std::vector<Series>& inputs, const PipelineConfig& cfg, int batch_threads,
                               const std::vector<std::string>& labels) {
    if (inputs.empty()) throw ArgumentError("batch needs at least one input");
    if (!labels.empty() && labels.size() != inputs.size()) throw ArgumentError("labels must match inputs");
    cfg.validate();
    BatchResult out;
    out.entries.resize(inputs.size());
    detail::parallel_for(inputs.size(), batch_threads, [&](std::size_t i) {
        auto& entry = out.entries[i];
        entry.label = labels.empty() ? "input" + std::to_string(i) : labels[i];
        try {
            entry.report = characterize(inputs[i], cfg);
            if (!entry.report->complete) entry.error = entry.report->failure;
        } catch (const std::exception& ex) {
            entry.error = ex.what();
        }
    });
    out.summary = summarize(out.entries);
    return out;
}

}  // namespace seisnoise

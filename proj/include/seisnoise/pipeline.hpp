#pragma once

#include "seisnoise/arima.hpp"
#include "seisnoise/garch.hpp"
#include "seisnoise/nonlinearity.hpp"
#include "seisnoise/series.hpp"
#include "seisnoise/stat_tests.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace seisnoise {

struct PipelineConfig {
    double alpha = 0.05;
    std::size_t n_samples = 50000;  // analysis window: the first n_samples values
    int n_surrogates = 20;
    std::size_t sw_sample = 2000;   // residuals handed to Shapiro-Wilk
    int d_max = 3;
    int p_max = 6;
    int m_max = 4;
    std::vector<int> garch_P{1, 2};
    std::vector<int> garch_Q{0, 1, 2};
    int arch_lags = 1;
    EmbeddingConfig embedding;
    bool ar1_verification = true;
    std::uint64_t seed = 0;
    int threads = 0;  // worker threads inside a run (surrogates, order grids); 0: hardware

    /// Throws ArgumentError on an invalid combination.
    void validate() const;
};

struct StageLogEntry {
    std::string stage;
    std::string summary;
};

/// Where the analyzed series came from.
struct ReportInput {
    std::string source;           // file path, FDSN request, or "memory"
    Series::Meta meta;
    double sample_rate = 1.0;
    std::size_t n_input = 0;
    std::size_t n_analyzed = 0;
};

struct ReportDiagnostics {
    int difference_passes = 0;  // equals integration_order on every complete report
    std::vector<IntegrationStage> integration_stages;
    bool still_integrating = false;
    std::vector<OrderCandidate> order_candidates;
    int order_reductions = 0;
    std::vector<std::string> insignificant_params;
    bool arima_converged = false;
    std::size_t sw_offset = 0;  // residual index of the first Shapiro-Wilk sample
    std::size_t sw_count = 0;
    double squared_residual_acf_outside = 0.0;  // fraction of lags outside the band
    double linearity_d2 = 0.0;
    std::vector<double> surrogate_d2;
    std::vector<GarchCandidate> garch_candidates;
};

/// Plot series carried alongside a report; not part of the JSON document.
struct PlotSeries {
    std::string x_label;
    std::string y_label;
    std::vector<double> x;
    std::vector<double> y;
};

struct CharacterizationReport {
    ReportInput input;
    PipelineConfig config;
    bool complete = false;
    std::string failure;  // "<stage>: <message>" when incomplete
    std::vector<std::string> warnings;

    int integration_order = 0;
    bool heteroskedastic = false;  // PSR on the stationarized series
    bool linear = true;
    bool gaussian = true;         // Shapiro-Wilk on GARCH-standardized residuals when a GARCH model is fitted
    bool arch_effect = false;

    /// Every verdict's evidence, keyed by test name (e.g. "adf_d0", "psr_differenced_tir").
    std::map<std::string, TestOutcome> tests;

    std::optional<ArimaModel> arima;
    std::optional<GarchModel> garch;  // present iff arch_effect
    ReportDiagnostics diagnostics;
    std::vector<StageLogEntry> stage_log;

    std::map<std::string, PlotSeries> plots;
};

/// Full characterization: determine_d, PSR on data and stationarized data,
/// linearity, ARIMA order selection, Shapiro-Wilk, residual PSR/ARCH/squared ACF,
/// then a GARCH order sweep when the ARCH LM test rejects.
///
/// A degenerate input or failed estimation in any stage stops the run and returns
/// the partial report with complete = false.
CharacterizationReport characterize(const Series& s, const PipelineConfig& cfg = {});

struct BatchEntry {
    std::string label;
    std::optional<CharacterizationReport> report;
    std::string error;  // nonempty when the run threw or the report is incomplete
};

struct ModelTrajectoryPoint {
    std::size_t index = 0;
    std::string order;  // "ARIMA(p,d,m)"
    std::vector<double> ar;
    std::vector<double> ma;
    double innovation_variance = 0.0;  // residual mean square
    double aic = 0.0;
};

struct BatchSummary {
    std::size_t total = 0;
    std::size_t succeeded = 0;
    std::size_t failed = 0;
    // Percentage of successful inputs testing positive for each property.
    double pct_integrating = 0.0;
    double pct_heteroskedastic = 0.0;
    double pct_nonlinear = 0.0;
    double pct_gaussian = 0.0;
    double pct_arch = 0.0;
    std::map<int, double> pct_by_order;  // integration order -> percentage
    std::vector<ModelTrajectoryPoint> trajectory;
};

struct BatchResult {
    std::vector<BatchEntry> entries;  // input order
    BatchSummary summary;
};

/// Runs characterize on every input concurrently (batch_threads workers; 0: hardware).
/// Failures are recorded per entry and do not stop the batch.
BatchResult batch_characterize(const std::vector<Series>& inputs, const PipelineConfig& cfg = {},
                               int batch_threads = 0, const std::vector<std::string>& labels = {});

/// Recomputes the aggregate from entries (used after merging externally produced entries).
BatchSummary summarize(const std::vector<BatchEntry>& entries);

}  // namespace seisnoise

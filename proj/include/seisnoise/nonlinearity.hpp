#pragma once

#include "seisnoise/series.hpp"
#include "seisnoise/stat_tests.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace seisnoise {

enum class SurrogateMethod { ft, aaft };

std::string to_string(SurrogateMethod m);
SurrogateMethod surrogate_method_from_string(const std::string& s);

struct SurrogateEnsemble {
    Series original;
    std::vector<Series> surrogates;
    SurrogateMethod method = SurrogateMethod::aaft;
    std::uint64_t seed = 0;
};

/// Phase-randomized surrogate with the source's amplitude spectrum (DC and Nyquist kept).
Series ft_surrogate(const Series& s, std::uint64_t seed);

/// Amplitude-adjusted FT surrogate; its values are a permutation of the source's.
Series aaft_surrogate(const Series& s, std::uint64_t seed);

/// Surrogate i is built from derive_seed(seed, i); generation may run concurrently.
SurrogateEnsemble make_surrogates(const Series& s, int n_surrogates, SurrogateMethod method, std::uint64_t seed,
                                  int threads = 0);

struct EmbeddingConfig {
    int dimension = 5;
    std::optional<int> delay = 1;       // nullopt: first lag where the ACF drops below 1/e
    std::optional<int> theiler_window;  // nullopt: dimension * delay
    int max_reference_points = 2000;
    std::uint64_t seed = 0;             // reference-point sampling
    // D2 is fitted where the correlation sum lies in [fit_c_low, fit_c_high],
    // i.e. between those quantiles of the sampled pair distances.
    double fit_c_low = 0.01;
    double fit_c_high = 0.1;
};

/// EmbeddingConfig with every optional field filled in for a particular series.
struct ResolvedEmbedding {
    int dimension = 0;
    int delay = 0;
    int theiler_window = 0;
    int max_reference_points = 0;
    std::uint64_t seed = 0;
    double fit_c_low = 0.0;
    double fit_c_high = 0.0;
};

ResolvedEmbedding resolve_embedding(const Series& s, const EmbeddingConfig& cfg);

/// First lag at which the sample ACF falls below 1/e.
int autocorrelation_decay_lag(const Series& s);

struct CorrelationDimEstimate {
    double d2 = 0.0;
    std::pair<double, double> r_fit_range;
    double fit_r_squared = 0.0;
    bool reliable = true;  // false when fit_r_squared < 0.9
    std::vector<std::pair<double, double>> curve;  // (log r, log C(r)), natural logs
    ResolvedEmbedding embedding;
    double pairs_counted = 0.0;
};

CorrelationDimEstimate correlation_dimension(const Series& s, const EmbeddingConfig& cfg = {});

struct LinearityOptions {
    int n_surrogates = 20;
    EmbeddingConfig embedding;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    int threads = 0;  // 0: hardware concurrency
};

struct LinearityResult {
    TestOutcome outcome;  // statistic = D2 of the data, two-tailed
    CorrelationDimEstimate data_estimate;
    std::vector<double> surrogate_d2;  // by surrogate index
};

/// Two-tailed surrogate test of the linear Gaussian null using D2 as statistic.
/// For n_surrogates <= 20 the interval is the surrogate min/max envelope,
/// otherwise the empirical alpha/2 and 1 - alpha/2 quantiles.
LinearityResult linearity_test(const Series& s, const LinearityOptions& opts = {});

}  // namespace seisnoise

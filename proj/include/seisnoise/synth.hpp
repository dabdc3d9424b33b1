#pragma once

#include "seisnoise/arima.hpp"
#include "seisnoise/garch.hpp"
#include "seisnoise/series.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seisnoise {

enum class ProcessKind { arima, garch, arima_garch, variance_step, bilinear, henon, gwn };

std::string to_string(ProcessKind k);
ProcessKind process_kind_from_string(const std::string& s);

/// Ground-truth process description. Only the fields of the chosen kind are read.
struct ProcessSpec {
    ProcessKind kind = ProcessKind::gwn;
    std::size_t n = 50000;
    std::uint64_t seed = 0;
    double sample_rate = 1.0;

    std::optional<ArimaModel> arima;  // arima, arima_garch
    std::optional<GarchModel> garch;  // garch, arima_garch

    double variance = 1.0;  // gwn; innovation variance of bilinear

    // variance_step: standard deviations before and after the midpoint
    double sigma1 = 1.0;
    double sigma2 = 2.0;

    // bilinear: y[k] = a y[k-1] + b y[k-1] e[k-1] + e[k]
    double bilinear_a = 0.4;
    double bilinear_b = 0.4;

    // henon: x' = 1 - a x^2 + y, y' = b x
    double henon_a = 1.4;
    double henon_b = 0.3;
};

inline constexpr std::size_t kMapBurnIn = 1000;

/// Throws ArgumentError when the spec cannot be generated.
void validate(const ProcessSpec& spec);

/// Output plus the driving sequence for the ARIMA kinds.
struct GeneratedProcess {
    Series series{std::vector<double>{}, 1.0};
    /// e[k] fed to the ARIMA filter, burn-in included: series[k] is driven by innovations[k + burn_in].
    std::vector<double> innovations;
    std::size_t burn_in = 0;
};

Series generate(const ProcessSpec& spec);
GeneratedProcess generate_detailed(const ProcessSpec& spec);

}  // namespace seisnoise

#include "seisnoise/synth.hpp"

#include "seisnoise/errors.hpp"
#include "seisnoise/random.hpp"

#include <cmath>

namespace seisnoise {

namespace {

const char* const kKindNames[] = {"arima", "garch", "arima_garch", "variance_step", "bilinear", "henon", "gwn"};

Series::Meta provenance(const ProcessSpec& spec) {
    return {{"source", "synth"}, {"kind", to_string(spec.kind)}, {"seed", std::to_string(spec.seed)}};
}

std::vector<double> scaled_normals(std::size_t n, std::uint64_t seed, double sd) {
    Rng rng(seed);
    auto e = rng.normals(n);
    for (auto& v : e) v *= sd;
    return e;
}

}  // namespace

std::string to_string(ProcessKind k) { return kKindNames[static_cast<int>(k)]; }

ProcessKind process_kind_from_string(const std::string& s) {
    for (int i = 0; i < 7; ++i)
        if (s == kKindNames[i]) return static_cast<ProcessKind>(i);
    throw ArgumentError("unknown process kind: " + s);
}

void validate(const ProcessSpec& spec) {
    if (spec.n < 1) throw ArgumentError("process length must be >= 1");
    if (!(spec.sample_rate > 0.0) || !std::isfinite(spec.sample_rate)) throw ArgumentError("sample rate must be positive");
    const bool needs_arima = spec.kind == ProcessKind::arima || spec.kind == ProcessKind::arima_garch;
    const bool needs_garch = spec.kind == ProcessKind::garch || spec.kind == ProcessKind::arima_garch;
    if (needs_arima) {
        if (!spec.arima) throw ArgumentError(to_string(spec.kind) + " process needs an ARIMA model");
        if (!is_stationary(*spec.arima) || !is_invertible(*spec.arima))
            throw ArgumentError("ARIMA model violates stationarity or invertibility");
        if (spec.kind == ProcessKind::arima && !(spec.arima->innovation_variance > 0.0))
            throw ArgumentError("innovation variance must be positive");
    }
    if (needs_garch) {
        if (!spec.garch) throw ArgumentError(to_string(spec.kind) + " process needs a GARCH model");
        // Re-run the model checks.
        const auto& g = *spec.garch;
        (void)make_garch(g.c0, g.arch, g.garch);
    }
    switch (spec.kind) {
    case ProcessKind::gwn:
        if (!(spec.variance > 0.0)) throw ArgumentError("variance must be positive");
        break;
    case ProcessKind::variance_step:
        if (!(spec.sigma1 > 0.0) || !(spec.sigma2 > 0.0)) throw ArgumentError("step standard deviations must be positive");
        break;
    case ProcessKind::bilinear:
        if (!(spec.variance > 0.0)) throw ArgumentError("variance must be positive");
        // Second-order stationarity of the bilinear recursion.
        if (!(spec.bilinear_a * spec.bilinear_a + spec.bilinear_b * spec.bilinear_b * spec.variance < 1.0))
            throw ArgumentError("bilinear coefficients are not second-order stationary");
        break;
    case ProcessKind::henon:
        if (!std::isfinite(spec.henon_a) || !std::isfinite(spec.henon_b)) throw ArgumentError("non-finite map parameter");
        break;
    default:
        break;
    }
}

GeneratedProcess generate_detailed(const ProcessSpec& spec) {
    validate(spec);
    const std::size_t n = spec.n;
    GeneratedProcess out;
    std::vector<double> y;

    switch (spec.kind) {
    case ProcessKind::gwn:
        y = scaled_normals(n, spec.seed, std::sqrt(spec.variance));
        break;
    case ProcessKind::variance_step: {
        y = scaled_normals(n, spec.seed, 1.0);
        for (std::size_t k = 0; k < n; ++k) y[k] *= k < n / 2 ? spec.sigma1 : spec.sigma2;
        break;
    }
    case ProcessKind::bilinear: {
        const std::size_t burn = kMapBurnIn;
        const auto e = scaled_normals(n + burn, spec.seed, std::sqrt(spec.variance));
        std::vector<double> w(n + burn, 0.0);
        w[0] = e[0];
        for (std::size_t k = 1; k < w.size(); ++k)
            w[k] = spec.bilinear_a * w[k - 1] + spec.bilinear_b * w[k - 1] * e[k - 1] + e[k];
        y.assign(w.begin() + static_cast<std::ptrdiff_t>(burn), w.end());
        break;
    }
    case ProcessKind::henon: {
        Rng rng(spec.seed);
        double x = 0.1 * rng.uniform(), v = 0.0;
        y.reserve(n);
        for (std::size_t k = 0; k < n + kMapBurnIn; ++k) {
            const double xn = 1.0 - spec.henon_a * x * x + v;
            v = spec.henon_b * x;
            x = xn;
            if (!std::isfinite(x)) throw ArgumentError("map orbit diverged");
            if (k >= kMapBurnIn) y.push_back(x);
        }
        break;
    }
    case ProcessKind::garch:
        y = simulate_garch(*spec.garch, n, spec.seed).data();
        break;
    case ProcessKind::arima: {
        out.burn_in = arima_burn_in(*spec.arima);
        out.innovations = scaled_normals(n + out.burn_in, spec.seed, std::sqrt(spec.arima->innovation_variance));
        y = filter_arima(*spec.arima, out.innovations).data();
        break;
    }
    case ProcessKind::arima_garch: {
        out.burn_in = arima_burn_in(*spec.arima);
        out.innovations = simulate_garch(*spec.garch, n + out.burn_in, spec.seed).data();
        y = filter_arima(*spec.arima, out.innovations).data();
        break;
    }
    }
    out.series = Series(std::move(y), spec.sample_rate, provenance(spec));
    return out;
}

Series generate(const ProcessSpec& spec) { return generate_detailed(spec).series; }

}  // namespace seisnoise

#include "fft.hpp"
#include "parallel.hpp"
#include "seisnoise/errors.hpp"
#include "seisnoise/nonlinearity.hpp"
#include "seisnoise/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace seisnoise {

namespace {

constexpr std::size_t kMinSurrogateLength = 256;

void check_length(const Series& s) {
    if (s.size() < kMinSurrogateLength) throw ArgumentError("surrogates require at least 256 samples");
}

std::vector<double> phase_randomize(std::span<const double> x, Rng& rng) {
    const std::size_t n = x.size();
    auto spec = detail::rfft(x);
    // Bin 0 (mean) and, for even n, the Nyquist bin must stay real.
    const std::size_t last = (n % 2 == 0) ? spec.size() - 1 : spec.size();
    for (std::size_t k = 1; k < last; ++k) {
        spec[k] = std::polar(std::abs(spec[k]), 2.0 * std::numbers::pi * rng.uniform());
    }
    return detail::irfft(spec, n);
}

/// Indices that sort x ascending (stable, so ties keep time order).
std::vector<std::size_t> argsort(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    return idx;
}

/// out[idx_k] = sorted_values[k] where idx sorts `order_of`.
std::vector<double> rank_remap(std::span<const double> order_of, const std::vector<double>& sorted_values) {
    const auto idx = argsort(order_of);
    std::vector<double> out(order_of.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = sorted_values[k];
    return out;
}

}  // namespace

std::string to_string(SurrogateMethod m) { return m == SurrogateMethod::ft ? "ft" : "aaft"; }

SurrogateMethod surrogate_method_from_string(const std::string& s) {
    if (s == "ft") return SurrogateMethod::ft;
    if (s == "aaft") return SurrogateMethod::aaft;
    throw ArgumentError("unknown surrogate method: " + s);
}

Series ft_surrogate(const Series& s, std::uint64_t seed) {
    check_length(s);
    Rng rng(seed);
    return s.with_values(phase_randomize(s.values(), rng));
}

Series aaft_surrogate(const Series& s, std::uint64_t seed) {
    check_length(s);
    Rng rng(seed);
    const auto x = s.values();

    auto gauss = rng.normals(x.size());
    std::sort(gauss.begin(), gauss.end());
    const auto gaussianized = rank_remap(x, gauss);

    const auto shuffled = phase_randomize(gaussianized, rng);

    std::vector<double> sorted_x(x.begin(), x.end());
    std::sort(sorted_x.begin(), sorted_x.end());
    return s.with_values(rank_remap(shuffled, sorted_x));
}

SurrogateEnsemble make_surrogates(const Series& s, int n_surrogates, SurrogateMethod method, std::uint64_t seed,
                                  int threads) {
    if (n_surrogates < 1) throw ArgumentError("need at least one surrogate");
    check_length(s);
    SurrogateEnsemble ens{s, {}, method, seed};
    std::vector<std::optional<Series>> out(static_cast<std::size_t>(n_surrogates));
    detail::parallel_for(out.size(), threads, [&](std::size_t i) {
        const auto child = derive_seed(seed, i);
        out[i] = method == SurrogateMethod::ft ? ft_surrogate(s, child) : aaft_surrogate(s, child);
    });
    ens.surrogates.reserve(out.size());
    for (auto& o : out) ens.surrogates.push_back(std::move(*o));
    return ens;
}

}  // namespace seisnoise

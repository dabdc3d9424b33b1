// Priestley-Subba Rao test on a block-averaged double-window estimate of the
// evolutionary spectrum.
//
// Short data window: Hann-tapered segments of `segment_length` samples.
// Time smoothing: the K segment periodograms inside each time block are averaged.
// With approximately exponential ordinates, log(mean of K) has variance
// trigamma(K) regardless of the underlying spectrum, which gives the known
// variance used to scale the two-way ANOVA sums of squares.

#include "seisnoise/errors.hpp"
#include "seisnoise/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace seisnoise {

namespace {

TestOutcome chi2_outcome(std::string name, double statistic, int dof, double alpha) {
    const boost::math::chi_squared chi2(dof);
    TestOutcome out;
    out.name = std::move(name);
    out.statistic = statistic;
    out.alpha = alpha;
    out.tail = Tail::right;
    out.p_value = boost::math::cdf(boost::math::complement(chi2, statistic));
    out.critical_upper = boost::math::quantile(boost::math::complement(chi2, alpha));
    out.reject_null = statistic > *out.critical_upper;
    out.details["dof"] = dof;
    return out;
}

int segment_length_for(int n_freq_points) {
    int len = 64;
    while (len < 4 * (n_freq_points + 1)) len *= 2;
    return len;
}

}  // namespace

int default_psr_time_blocks(std::size_t n) {
    return static_cast<int>(std::clamp<std::size_t>(n / 1024, 2, 15));
}

PsrOutcome psr_test(const Series& s, double alpha) {
    return psr_test(s, default_psr_time_blocks(s.size()), kDefaultPsrFreqPoints, alpha);
}

PsrOutcome psr_test(const Series& s, int n_time_blocks, int n_freq_points, double alpha) {
    const std::size_t n = s.size();
    if (n < 4096) throw ArgumentError("PSR test requires at least 4096 samples");
    if (n_time_blocks < 2 || n_freq_points < 2) throw ArgumentError("PSR grid needs >= 2 time blocks and >= 2 frequencies");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");

    const int seg_len = segment_length_for(n_freq_points);
    const std::size_t block_len = n / static_cast<std::size_t>(n_time_blocks);
    const int per_block = static_cast<int>(block_len / static_cast<std::size_t>(seg_len));
    if (per_block < 4) throw ArgumentError("PSR grid too fine for the series length");

    // Grid bins evenly spread over (0, Nyquist), at least 3 bins apart so the
    // Hann-window estimates at neighbouring grid points are nearly uncorrelated.
    const double spacing = (seg_len / 2.0) / (n_freq_points + 1);
    std::vector<int> bins(static_cast<std::size_t>(n_freq_points));
    for (int j = 0; j < n_freq_points; ++j) bins[static_cast<std::size_t>(j)] = static_cast<int>(std::lround(spacing * (j + 1)));

    std::vector<double> taper(static_cast<std::size_t>(seg_len));
    for (int i = 0; i < seg_len; ++i) {
        taper[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / seg_len);
    }
    // twiddle[j][i] = exp(-2 pi i bin_j i / L)
    std::vector<std::vector<std::complex<double>>> twiddle(bins.size());
    for (std::size_t j = 0; j < bins.size(); ++j) {
        twiddle[j].resize(static_cast<std::size_t>(seg_len));
        for (int i = 0; i < seg_len; ++i) {
            twiddle[j][static_cast<std::size_t>(i)] =
                std::polar(1.0, -2.0 * std::numbers::pi * bins[j] * i / static_cast<double>(seg_len));
        }
    }

    const double mu = mean(s.values());
    const auto x = s.values();
    const auto nt = static_cast<std::size_t>(n_time_blocks);
    const auto nf = static_cast<std::size_t>(n_freq_points);

    PsrOutcome out;
    out.n_time_blocks = n_time_blocks;
    out.n_freq_points = n_freq_points;
    out.segment_length = seg_len;
    out.segments_per_block = per_block;
    out.alpha = alpha;
    out.log_spectrum.assign(nt, std::vector<double>(nf, 0.0));
    for (int b : bins) out.frequencies.push_back(b * s.sample_rate() / seg_len);

    std::vector<double> seg(static_cast<std::size_t>(seg_len));
    for (std::size_t blk = 0; blk < nt; ++blk) {
        std::vector<double> power(nf, 0.0);
        for (int k = 0; k < per_block; ++k) {
            const std::size_t start = blk * block_len + static_cast<std::size_t>(k * seg_len);
            for (int i = 0; i < seg_len; ++i) {
                const auto iu = static_cast<std::size_t>(i);
                seg[iu] = (x[start + iu] - mu) * taper[iu];
            }
            for (std::size_t j = 0; j < nf; ++j) {
                std::complex<double> acc{0.0, 0.0};
                for (std::size_t i = 0; i < seg.size(); ++i) acc += seg[i] * twiddle[j][i];
                power[j] += std::norm(acc);
            }
        }
        for (std::size_t j = 0; j < nf; ++j) {
            if (!(power[j] > 0.0)) throw DegenerateInputError("PSR test: zero spectral estimate (constant series?)");
            out.log_spectrum[blk][j] = std::log(power[j] / per_block);
        }
    }

    // Two-way ANOVA without replication on Y[block][freq].
    double grand = 0.0;
    std::vector<double> row_mean(nt, 0.0), col_mean(nf, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nf; ++j) {
            const double y = out.log_spectrum[i][j];
            row_mean[i] += y;
            col_mean[j] += y;
            grand += y;
        }
    }
    for (auto& v : row_mean) v /= static_cast<double>(nf);
    for (auto& v : col_mean) v /= static_cast<double>(nt);
    grand /= static_cast<double>(nt * nf);

    double ss_time = 0.0, ss_ir = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        ss_time += (row_mean[i] - grand) * (row_mean[i] - grand);
        for (std::size_t j = 0; j < nf; ++j) {
            const double r = out.log_spectrum[i][j] - row_mean[i] - col_mean[j] + grand;
            ss_ir += r * r;
        }
    }
    ss_time *= static_cast<double>(nf);

    out.log_variance = boost::math::trigamma(static_cast<double>(per_block));
    const double st = ss_time / out.log_variance;
    const double sir = ss_ir / out.log_variance;

    // Each component is tested at the Sidak level so that "any component
    // rejects" has overall size alpha.
    const double component_alpha = -std::expm1(std::log1p(-alpha) / 3.0);
    const int dof_t = n_time_blocks - 1;
    const int dof_ir = (n_time_blocks - 1) * (n_freq_points - 1);
    out.t_component = chi2_outcome("psr_t", st, dof_t, component_alpha);
    out.ir_component = chi2_outcome("psr_i+r", sir, dof_ir, component_alpha);
    out.tir_component = chi2_outcome("psr_t+i+r", st + sir, dof_t + dof_ir, component_alpha);
    return out;
}

}  // namespace seisnoise

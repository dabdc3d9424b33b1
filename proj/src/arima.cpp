#include "parallel.hpp"
#include "regression.hpp"
#include "seisnoise/arima.hpp"
#include "seisnoise/random.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace seisnoise {

namespace {

constexpr double kBoundaryModulus = 1.001;
constexpr double kFeasibleModulus = 1.0 + 1e-7;

struct Layout {
    std::vector<int> ar_lags;  // 1-based lags of free AR coefficients
    std::vector<int> ma_lags;
    int p = 0;
    int m = 0;
    [[nodiscard]] int k() const { return static_cast<int>(ar_lags.size() + ma_lags.size()); }
    [[nodiscard]] int t0() const { return std::max(p, m); }
};

Layout make_layout(const std::vector<bool>& ar_free, const std::vector<bool>& ma_free) {
    Layout l;
    l.p = static_cast<int>(ar_free.size());
    l.m = static_cast<int>(ma_free.size());
    for (int i = 0; i < l.p; ++i)
        if (ar_free[static_cast<std::size_t>(i)]) l.ar_lags.push_back(i + 1);
    for (int j = 0; j < l.m; ++j)
        if (ma_free[static_cast<std::size_t>(j)]) l.ma_lags.push_back(j + 1);
    return l;
}

void expand(const Layout& l, const Eigen::VectorXd& beta, std::vector<double>& phi, std::vector<double>& theta) {
    phi.assign(static_cast<std::size_t>(l.p), 0.0);
    theta.assign(static_cast<std::size_t>(l.m), 0.0);
    int k = 0;
    for (int lag : l.ar_lags) phi[static_cast<std::size_t>(lag - 1)] = beta[k++];
    for (int lag : l.ma_lags) theta[static_cast<std::size_t>(lag - 1)] = beta[k++];
}

double ma_min_modulus(const std::vector<double>& theta) {
    std::vector<double> neg(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) neg[j] = -theta[j];
    return min_root_modulus(neg);
}

double feasibility_margin(const std::vector<double>& phi, const std::vector<double>& theta) {
    return std::min(min_root_modulus(phi), ma_min_modulus(theta));
}

// e_t = w_t - sum phi_i w_{t-i} - sum theta_j e_{t-j} for t >= t0; e_t = 0 before.
std::vector<double> residuals_of(std::span<const double> w, const std::vector<double>& phi,
                                 const std::vector<double>& theta, int t0) {
    const std::size_t n = w.size();
    std::vector<double> e(n, 0.0);
    for (std::size_t t = static_cast<std::size_t>(t0); t < n; ++t) {
        double v = w[t];
        for (std::size_t i = 0; i < phi.size(); ++i) v -= phi[i] * w[t - i - 1];
        for (std::size_t j = 0; j < theta.size(); ++j) v -= theta[j] * e[t - j - 1];
        e[t] = v;
    }
    return e;
}

double sum_squares(const std::vector<double>& e, int t0) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(t0); t < e.size(); ++t) s += e[t] * e[t];
    return s;
}

// Rows t0..n-1 of de/dbeta.
Eigen::MatrixXd jacobian(std::span<const double> w, const std::vector<double>& e, const std::vector<double>& theta,
                         const Layout& l) {
    const std::size_t n = w.size();
    const auto t0 = static_cast<std::size_t>(l.t0());
    const int k = l.k();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - t0), k);
    // Column recursion: de_t/db = -x_t - sum theta_j de_{t-j}/db, zero before t0.
    std::vector<double> col(n, 0.0);
    auto fill = [&](int c, auto&& driver) {
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t t = t0; t < n; ++t) {
            double v = -driver(t);
            for (std::size_t j = 0; j < theta.size(); ++j) v -= theta[j] * col[t - j - 1];
            col[t] = v;
            J(static_cast<Eigen::Index>(t - t0), c) = v;
        }
    };
    int c = 0;
    for (int lag : l.ar_lags) {
        const auto s = static_cast<std::size_t>(lag);
        fill(c++, [&](std::size_t t) { return w[t - s]; });
    }
    for (int lag : l.ma_lags) {
        const auto s = static_cast<std::size_t>(lag);
        fill(c++, [&](std::size_t t) { return e[t - s]; });
    }
    return J;
}

// Hannan-Rissanen: long AR for innovations, then OLS on lagged data and innovations.
Eigen::VectorXd hannan_rissanen(std::span<const double> w, const Layout& l) {
    const int k = l.k();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    if (k == 0) return beta;
    const std::size_t n = w.size();
    std::vector<double> ehat(n, 0.0);
    int long_order = 0;
    if (!l.ma_lags.empty()) {
        long_order = static_cast<int>(std::min<std::size_t>(n / 20, static_cast<std::size_t>(std::max(40, 2 * (l.p + l.m)))));
        const auto L = static_cast<std::size_t>(long_order);
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n - L), static_cast<Eigen::Index>(L));
        Eigen::VectorXd y(static_cast<Eigen::Index>(n - L));
        for (std::size_t t = L; t < n; ++t) {
            y[static_cast<Eigen::Index>(t - L)] = w[t];
            for (std::size_t i = 0; i < L; ++i) X(static_cast<Eigen::Index>(t - L), static_cast<Eigen::Index>(i)) = w[t - i - 1];
        }
        try {
            const auto fit = detail::ols(X, y);
            for (std::size_t t = L; t < n; ++t) ehat[t] = fit.residuals[static_cast<Eigen::Index>(t - L)];
        } catch (const DegenerateInputError&) {
            return beta;
        }
    }
    const auto start = static_cast<std::size_t>(long_order + l.t0());
    if (start + static_cast<std::size_t>(k) + 10 >= n) return beta;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n - start), k);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n - start));
    for (std::size_t t = start; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - start);
        y[r] = w[t];
        int c = 0;
        for (int lag : l.ar_lags) X(r, c++) = w[t - static_cast<std::size_t>(lag)];
        for (int lag : l.ma_lags) X(r, c++) = ehat[t - static_cast<std::size_t>(lag)];
    }
    try {
        beta = detail::ols(X, y).beta;
    } catch (const DegenerateInputError&) {
        beta.setZero();
    }
    return beta;
}

// Pull a start vector inside the feasible region by shrinking toward zero.
Eigen::VectorXd make_feasible(Eigen::VectorXd beta, const Layout& l) {
    std::vector<double> phi, theta;
    for (int it = 0; it < 200; ++it) {
        expand(l, beta, phi, theta);
        if (feasibility_margin(phi, theta) > 1.01) return beta;
        beta *= 0.9;
    }
    return Eigen::VectorXd::Zero(beta.size());
}

struct LmResult {
    Eigen::VectorXd beta;
    std::vector<double> e;
    double ss = 0.0;
    int iterations = 0;
    bool converged = false;
};

LmResult levenberg_marquardt(std::span<const double> w, const Layout& l, Eigen::VectorXd beta, int max_iter) {
    const int t0 = l.t0();
    std::vector<double> phi, theta;
    expand(l, beta, phi, theta);
    LmResult r;
    r.e = residuals_of(w, phi, theta, t0);
    r.ss = sum_squares(r.e, t0);
    r.beta = beta;
    if (l.k() == 0) {
        r.converged = true;
        return r;
    }
    double lambda = 1e-3;
    for (int it = 0; it < max_iter; ++it) {
        r.iterations = it + 1;
        expand(l, r.beta, phi, theta);
        const Eigen::MatrixXd J = jacobian(w, r.e, theta, l);
        const Eigen::Map<const Eigen::VectorXd> ev(r.e.data() + t0, static_cast<Eigen::Index>(r.e.size()) - t0);
        const Eigen::MatrixXd H = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * ev;
        Eigen::VectorXd diag = H.diagonal().cwiseMax(1e-12 * std::max(1.0, H.diagonal().maxCoeff()));

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd A = H;
            A.diagonal() += lambda * diag;
            const Eigen::VectorXd step = -A.ldlt().solve(g);
            const Eigen::VectorXd trial = r.beta + step;
            std::vector<double> tphi, ttheta;
            expand(l, trial, tphi, ttheta);
            if (!step.allFinite() || feasibility_margin(tphi, ttheta) <= kFeasibleModulus) {
                lambda *= 4.0;
                continue;
            }
            auto te = residuals_of(w, tphi, ttheta, t0);
            const double tss = sum_squares(te, t0);
            if (std::isfinite(tss) && tss < r.ss) {
                const double gain = r.ss - tss;
                const double old_ss = r.ss;
                r.beta = trial;
                r.e = std::move(te);
                r.ss = tss;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (gain <= 1e-12 * old_ss && step.norm() <= 1e-8 * (1.0 + r.beta.norm())) r.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // No decrease is possible at floating-point resolution: a (possibly boundary) minimum.
            r.converged = true;
        }
        if (r.converged) break;
    }
    return r;
}

std::vector<double> prepared(const Series& s, bool demean, double& mu) {
    const auto v = s.values();
    mu = demean ? mean(v) : 0.0;
    std::vector<double> w(v.begin(), v.end());
    if (demean)
        for (auto& x : w) x -= mu;
    return w;
}

ArimaFit fit_impl(const Series& s, const std::vector<bool>& ar_free, const std::vector<bool>& ma_free,
                  const ArimaFitOptions& opts, bool demean) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    if (opts.max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    const Layout l = make_layout(ar_free, ma_free);
    const std::size_t need = 50 * static_cast<std::size_t>(l.p + l.m + 1);
    if (s.size() < need) {
        throw ArgumentError("ARMA(" + std::to_string(l.p) + "," + std::to_string(l.m) + ") needs at least " +
                            std::to_string(need) + " samples");
    }
    if (!(variance(s.values()) > 0.0)) throw DegenerateInputError("ARMA fit of a constant series");

    double mu = 0.0;
    const auto w = prepared(s, demean, mu);
    const int k = l.k();

    LmResult best = levenberg_marquardt(w, l, make_feasible(hannan_rissanen(w, l), l), opts.max_iterations);
    if (!best.converged && k > 0) {
        auto alt = levenberg_marquardt(w, l, Eigen::VectorXd::Zero(k), opts.max_iterations);
        if (alt.ss < best.ss || (alt.converged && alt.ss <= best.ss * (1.0 + 1e-9))) best = std::move(alt);
    }

    ArimaFit fit;
    auto& mdl = fit.model;
    mdl.p = l.p;
    mdl.m = l.m;
    mdl.d = 0;
    mdl.ar_free = ar_free;
    mdl.ma_free = ma_free;
    expand(l, best.beta, mdl.ar, mdl.ma);
    mdl.ar_se.assign(mdl.ar.size(), 0.0);
    mdl.ma_se.assign(mdl.ma.size(), 0.0);
    mdl.mean = mu;
    mdl.includes_mean = demean;
    mdl.n_fit = s.size();

    const int t0 = l.t0();
    const auto n_e = static_cast<double>(w.size() - static_cast<std::size_t>(t0));
    const auto n_w = static_cast<double>(w.size());
    const double sigma2 = best.ss / n_e;
    mdl.innovation_variance = sigma2;
    // Scaled to the full differenced length so AIC compares across orders with different conditioning losses.
    mdl.log_likelihood = -0.5 * n_w * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    const int kk = mdl.free_parameter_count();
    mdl.aic = 2.0 * kk - 2.0 * mdl.log_likelihood;
    mdl.bic = kk * std::log(n_w) - 2.0 * mdl.log_likelihood;
    mdl.boundary = k > 0 && feasibility_margin(mdl.ar, mdl.ma) < kBoundaryModulus;

    auto& diag = fit.diagnostics;
    diag.converged = best.converged;
    diag.iterations = best.iterations;
    if (k > 0) {
        const Eigen::MatrixXd J = jacobian(w, best.e, mdl.ma, l);
        const Eigen::MatrixXd H = J.transpose() * J;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        Eigen::VectorXd se(k);
        const double top = eig.eigenvalues().maxCoeff();
        if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 1e-12 * top) {
            const Eigen::MatrixXd cov = sigma2 * (eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                                                  eig.eigenvectors().transpose());
            se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
        } else {
            se.setConstant(std::numeric_limits<double>::infinity());
        }
        const double z = boost::math::quantile(boost::math::normal(), 1.0 - opts.alpha / 2.0);
        int c = 0;
        for (int lag : l.ar_lags) {
            const auto i = static_cast<std::size_t>(lag - 1);
            mdl.ar_se[i] = se[c++];
            if (!(std::abs(mdl.ar[i]) > z * mdl.ar_se[i])) diag.insignificant_params.push_back("ar" + std::to_string(lag));
        }
        for (int lag : l.ma_lags) {
            const auto j = static_cast<std::size_t>(lag - 1);
            mdl.ma_se[j] = se[c++];
            if (!(std::abs(mdl.ma[j]) > z * mdl.ma_se[j])) diag.insignificant_params.push_back("ma" + std::to_string(lag));
        }
    }

    std::vector<double> resid(best.e.begin() + t0, best.e.end());
    diag.residuals = s.with_values(std::move(resid));
    const int lags = opts.whiteness_lags ? *opts.whiteness_lags : default_whiteness_lags(diag.residuals.size());
    diag.whiteness = whiteness_test(diag.residuals, lags, opts.alpha, opts.whiteness_band);

    if (!best.converged) {
        throw ArimaEstimationError("ARMA estimation did not converge in " + std::to_string(opts.max_iterations) +
                                       " iterations",
                                   std::move(fit));
    }
    return fit;
}

std::vector<bool> all_free(int n) {
    if (n < 0) throw ArgumentError("ARMA orders must be nonnegative");
    return std::vector<bool>(static_cast<std::size_t>(n), true);
}

}  // namespace

int ArimaModel::free_parameter_count() const {
    int k = 1 + (includes_mean ? 1 : 0);
    k += static_cast<int>(std::count(ar_free.begin(), ar_free.end(), true));
    k += static_cast<int>(std::count(ma_free.begin(), ma_free.end(), true));
    return k;
}

std::string ArimaModel::order_string() const {
    return "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(m) + ")";
}

ArimaModel make_arima(std::vector<double> ar, int d, std::vector<double> ma, double innovation_variance, double mean) {
    if (d < 0) throw ArgumentError("d must be nonnegative");
    if (!(innovation_variance > 0.0)) throw ArgumentError("innovation variance must be positive");
    ArimaModel m;
    m.p = static_cast<int>(ar.size());
    m.m = static_cast<int>(ma.size());
    m.d = d;
    m.ar_free.assign(ar.size(), true);
    m.ma_free.assign(ma.size(), true);
    m.ar_se.assign(ar.size(), 0.0);
    m.ma_se.assign(ma.size(), 0.0);
    m.ar = std::move(ar);
    m.ma = std::move(ma);
    m.innovation_variance = innovation_variance;
    m.mean = mean;
    m.includes_mean = d == 0;
    if (!is_stationary(m)) throw ArgumentError("AR polynomial has a root on or inside the unit circle");
    if (!is_invertible(m)) throw ArgumentError("MA polynomial has a root on or inside the unit circle");
    return m;
}

namespace {

// Reciprocal roots of 1 - sum c_i z^i: eigenvalues of the companion matrix.
Eigen::VectorXcd inverse_roots(std::span<const double> c) {
    std::size_t deg = c.size();
    while (deg > 0 && c[deg - 1] == 0.0) --deg;
    if (deg == 0) return {};
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
    for (std::size_t i = 0; i < deg; ++i) comp(0, static_cast<Eigen::Index>(i)) = c[i];
    for (std::size_t i = 1; i < deg; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    return comp.eigenvalues();
}

}  // namespace

double min_root_modulus(std::span<const double> c) {
    const auto inv = inverse_roots(c);
    if (inv.size() == 0) return std::numeric_limits<double>::infinity();
    const double rho = inv.cwiseAbs().maxCoeff();
    return rho > 0.0 ? 1.0 / rho : std::numeric_limits<double>::infinity();
}

bool has_common_factor(const ArimaModel& model, double rel_tol) {
    std::vector<double> neg(model.ma.size());
    for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -model.ma[j];
    const auto a = inverse_roots(model.ar);
    const auto b = inverse_roots(neg);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const auto ra = 1.0 / a[i];
            const auto rb = 1.0 / b[j];
            if (std::abs(ra - rb) < rel_tol * std::abs(ra)) return true;
        }
    }
    return false;
}

bool is_stationary(const ArimaModel& model) { return min_root_modulus(model.ar) > 1.0; }
bool is_invertible(const ArimaModel& model) { return ma_min_modulus(model.ma) > 1.0; }

ArimaFit fit_arma(const Series& s, int p, int m, const ArimaFitOptions& opts) {
    return fit_impl(s, all_free(p), all_free(m), opts, opts.demean);
}

ArimaFit fit_arma_masked(const Series& s, const std::vector<bool>& ar_free, const std::vector<bool>& ma_free,
                         const ArimaFitOptions& opts) {
    return fit_impl(s, ar_free, ma_free, opts, opts.demean);
}

ArimaFit fit_arima(const Series& s, int p, int d, int m, const ArimaFitOptions& opts) {
    if (d < 0 || d > 3) throw ArgumentError("d must lie in 0..3");
    if (s.size() <= static_cast<std::size_t>(d)) throw ArgumentError("series shorter than the differencing order");
    ArimaFitOptions o = opts;
    o.demean = d == 0;
    auto finish = [&](ArimaFit f) {
        f.model.d = d;
        f.model.n_fit = s.size();
        return f;
    };
    try {
        return finish(fit_arma(difference(s, d), p, m, o));
    } catch (const ArimaEstimationError& e) {
        throw ArimaEstimationError(e.what(), finish(e.best_so_far()));
    }
}

Series arima_residuals(const ArimaModel& model, const Series& s) {
    if (s.size() <= static_cast<std::size_t>(model.d + std::max(model.p, model.m)))
        throw ArgumentError("series too short for the model's conditioning offset");
    const auto x = difference(s, model.d);
    const auto v = x.values();
    std::vector<double> w(v.begin(), v.end());
    if (model.includes_mean)
        for (auto& y : w) y -= model.mean;
    const int t0 = std::max(model.p, model.m);
    auto e = residuals_of(w, model.ar, model.ma, t0);
    return s.with_values(std::vector<double>(e.begin() + t0, e.end()));
}

// ---------------------------------------------------------------------------

namespace {

struct CandidateFit {
    std::optional<ArimaFit> fit;
    bool converged = false;
};

CandidateFit try_fit(const Series& x, const std::vector<bool>& ar_free, const std::vector<bool>& ma_free,
                     const ArimaFitOptions& o) {
    CandidateFit c;
    try {
        c.fit = fit_arma_masked(x, ar_free, ma_free, o);
        c.converged = true;
    } catch (const ArimaEstimationError& e) {
        c.fit = e.best_so_far();
    } catch (const ArgumentError&) {
    } catch (const DegenerateInputError&) {
    }
    return c;
}

bool acceptable(const ArimaFit& f) { return !f.diagnostics.whiteness.reject_null && f.diagnostics.insignificant_params.empty(); }

// Smallest |estimate / SE| among free coefficients gets pinned.
void unpin_weakest(const ArimaModel& m, std::vector<bool>& ar, std::vector<bool>& ma) {
    double weakest = std::numeric_limits<double>::infinity();
    std::vector<bool>* mask = nullptr;
    std::size_t slot = 0;
    auto scan = [&](const std::vector<double>& c, const std::vector<double>& se, std::vector<bool>& free) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!free[i]) continue;
            const double t = se[i] > 0.0 ? std::abs(c[i]) / se[i] : std::numeric_limits<double>::infinity();
            if (t < weakest || mask == nullptr) {
                weakest = t;
                mask = &free;
                slot = i;
            }
        }
    };
    scan(m.ar, m.ar_se, ar);
    scan(m.ma, m.ma_se, ma);
    if (mask) (*mask)[slot] = false;
}

void trim_trailing(std::vector<bool>& mask) {
    while (!mask.empty() && !mask.back()) mask.pop_back();
}

}  // namespace

OrderSelection select_order(const Series& s, int d, const OrderSelectionOptions& opts) {
    if (d < 0 || d > 3) throw ArgumentError("d must lie in 0..3");
    if (opts.p_max < 0 || opts.m_max < 0 || opts.p_max > 8 || opts.m_max > 8)
        throw ArgumentError("p_max and m_max must lie in 0..8");
    const Series x = difference(s, d);
    ArimaFitOptions o = opts.fit;
    o.alpha = opts.alpha;
    o.demean = d == 0;

    struct Slot {
        int p, m;
        CandidateFit c;
    };
    std::vector<Slot> grid;
    for (int p = 0; p <= opts.p_max; ++p)
        for (int m = 0; m <= opts.m_max; ++m) grid.push_back({p, m, {}});
    detail::parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
        grid[i].c = try_fit(x, all_free(grid[i].p), all_free(grid[i].m), o);
    });

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i].c.fit) order.push_back(i);
    if (order.empty()) throw EstimationError("no ARMA candidate could be estimated");
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return grid[a].c.fit->model.aic < grid[b].c.fit->model.aic; });

    OrderSelection out;
    for (std::size_t i : order) {
        const auto& f = *grid[i].c.fit;
        out.candidates.push_back({grid[i].p, grid[i].m, f.model.aic, !f.diagnostics.whiteness.reject_null,
                                  f.diagnostics.insignificant_params.empty(), has_common_factor(f.model), true});
    }
    for (const auto& g : grid)
        if (!g.c.fit)
            out.candidates.push_back({g.p, g.m, std::numeric_limits<double>::infinity(), false, false, false, false});

    auto finish = [&](ArimaFit f, bool validated) {
        f.model.d = d;
        f.model.n_fit = s.size();
        f.model.not_validated = !validated;
        out.selected = std::move(f);
        return out;
    };

    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& cand = grid[order[k]].c;
        if (!cand.converged || out.candidates[k].redundant) continue;
        ArimaFit f = *cand.fit;
        if (f.diagnostics.whiteness.reject_null) continue;
        // Overfit check: pin the least significant term to zero, re-estimate, repeat.
        bool ok = true;
        while (!f.diagnostics.insignificant_params.empty()) {
            auto ar = f.model.ar_free;
            auto ma = f.model.ma_free;
            unpin_weakest(f.model, ar, ma);
            trim_trailing(ar);
            trim_trailing(ma);
            const auto refit = try_fit(x, ar, ma, o);
            ++out.reductions;
            if (!refit.converged || refit.fit->diagnostics.whiteness.reject_null || has_common_factor(refit.fit->model)) {
                ok = false;
                break;
            }
            f = *refit.fit;
        }
        if (ok && acceptable(f)) return finish(std::move(f), true);
    }
    return finish(*grid[order.front()].c.fit, false);
}

// ---------------------------------------------------------------------------

IntegrationOrder determine_d(const Series& s, double alpha, int d_max, const DifferencingPolicy& policy) {
    if (d_max < 0 || d_max > 3) throw ArgumentError("d_max must lie in 0..3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    IntegrationOrder out;
    for (int d = 0; d <= d_max; ++d) {
        const Series x = difference(s, d);
        IntegrationStage st;
        st.d = d;
        st.ar1 = ar1_coefficient(x);
        if (x.size() >= 4096) {
            st.psr_run = true;
            st.heteroskedastic = psr_test(x, alpha).reject_null();
        }
        if (st.heteroskedastic) {
            st.method = "ar1";
            st.integrating = st.ar1 > kIntegratingAr1Threshold;
        } else {
            st.method = policy.ar1_verification ? "adf+pp+ar1" : "adf+pp";
            UnitRootConfig cfg;
            cfg.deterministic = d == 0 ? policy.first_stage : policy.later_stages;
            st.adf = adf_test(x, cfg, alpha);
            st.pp = pp_test(x, cfg, alpha);
            st.integrating = !(st.adf->reject_null && st.pp->reject_null);
            if (policy.ar1_verification && st.ar1 > kIntegratingAr1Threshold) st.integrating = true;
        }
        out.stages.push_back(st);
        out.d = d;
        if (!st.integrating) return out;
    }
    out.still_integrating = true;
    return out;
}

// ---------------------------------------------------------------------------

Series filter_arima(const ArimaModel& model, std::span<const double> innovations, double sample_rate) {
    const std::size_t burn = arima_burn_in(model);
    if (innovations.size() <= burn) throw ArgumentError("innovation sequence shorter than the burn-in");
    const std::size_t total = innovations.size();
    std::vector<double> w(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        double v = innovations[t];
        for (std::size_t i = 0; i < model.ar.size() && i < t; ++i) v += model.ar[i] * w[t - i - 1];
        for (std::size_t j = 0; j < model.ma.size() && j < t; ++j) v += model.ma[j] * innovations[t - j - 1];
        w[t] = v;
    }
    std::vector<double> y(w.begin() + static_cast<std::ptrdiff_t>(burn), w.end());
    if (model.d == 0)
        for (auto& v : y) v += model.mean;
    for (int k = 0; k < model.d; ++k) {
        double acc = 0.0;
        for (auto& v : y) {
            acc += v;
            v = acc;
        }
    }
    return Series(std::move(y), sample_rate);
}

Series simulate_arima(const ArimaModel& model, std::size_t n, std::uint64_t seed, double sample_rate) {
    if (n < 1) throw ArgumentError("n must be >= 1");
    if (!(model.innovation_variance > 0.0)) throw ArgumentError("innovation variance must be positive");
    if (!is_stationary(model) || !is_invertible(model)) throw ArgumentError("model violates stationarity or invertibility");
    Rng rng(seed);
    auto e = rng.normals(n + arima_burn_in(model));
    const double sd = std::sqrt(model.innovation_variance);
    for (auto& v : e) v *= sd;
    return filter_arima(model, e, sample_rate);
}

}  // namespace seisnoise

#include "parallel.hpp"
#include "seisnoise/garch.hpp"
#include "seisnoise/random.hpp"

#include <Eigen/Dense>
#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace seisnoise {

namespace {

constexpr double kNearIntegrated = 0.999;
constexpr double kMinLength = 1000;

// theta = (c0, b_1..b_P, a_1..a_Q).
struct Evaluation {
    double nll = 0.0;  // negative log-likelihood
    Eigen::VectorXd grad;
    Eigen::MatrixXd info;  // 0.5 sum (dsigma2)(dsigma2)' / sigma^4
    std::vector<double> sigma2;
};

Evaluation evaluate(const Eigen::VectorXd& theta, int P, int Q, std::span<const double> x, double v,
                    bool derivatives) {
    const std::size_t n = x.size();
    const int K = 1 + P + Q;
    Evaluation ev;
    ev.sigma2.resize(n);
    // dsig[k * K + c]: derivative of sigma2_k with respect to theta_c.
    std::vector<double> dsig(derivatives ? n * static_cast<std::size_t>(K) : 0, 0.0);
    if (derivatives) {
        ev.grad = Eigen::VectorXd::Zero(K);
        ev.info = Eigen::MatrixXd::Zero(K, K);
    }
    Eigen::VectorXd d(K);
    const double log2pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < n; ++k) {
        double s2 = theta[0];
        for (int i = 1; i <= P; ++i) {
            const double x2 = k >= static_cast<std::size_t>(i) ? x[k - i] * x[k - i] : v;
            s2 += theta[i] * x2;
        }
        for (int j = 1; j <= Q; ++j) {
            const double prev = k >= static_cast<std::size_t>(j) ? ev.sigma2[k - j] : v;
            s2 += theta[P + j] * prev;
        }
        ev.sigma2[k] = s2;
        const double xx = x[k] * x[k];
        ev.nll += 0.5 * (log2pi + std::log(s2) + xx / s2);
        if (!derivatives) continue;
        d[0] = 1.0;
        for (int i = 1; i <= P; ++i) d[i] = k >= static_cast<std::size_t>(i) ? x[k - i] * x[k - i] : v;
        for (int j = 1; j <= Q; ++j) d[P + j] = k >= static_cast<std::size_t>(j) ? ev.sigma2[k - j] : v;
        for (int j = 1; j <= Q; ++j) {
            if (k < static_cast<std::size_t>(j)) continue;
            const double a = theta[P + j];
            const double* prev = &dsig[(k - j) * static_cast<std::size_t>(K)];
            for (int c = 0; c < K; ++c) d[c] += a * prev[c];
        }
        std::copy(d.data(), d.data() + K, &dsig[k * static_cast<std::size_t>(K)]);
        ev.grad += 0.5 * (1.0 / s2 - xx / (s2 * s2)) * d;
        ev.info.noalias() += (0.5 / (s2 * s2)) * d * d.transpose();
    }
    return ev;
}

// Unconstrained u -> theta: c0 = exp(u0); coefficients w_i / (1 + sum w), w = exp(u).
// Every coefficient stays positive and their sum stays below one.
struct Transform {
    int P, Q;
    [[nodiscard]] Eigen::VectorXd to_theta(const Eigen::VectorXd& u) const {
        const int K = 1 + P + Q;
        Eigen::VectorXd t(K);
        t[0] = std::exp(u[0]);
        double s = 1.0;
        for (int c = 1; c < K; ++c) s += std::exp(u[c]);
        for (int c = 1; c < K; ++c) t[c] = std::exp(u[c]) / s;
        return t;
    }
    [[nodiscard]] Eigen::VectorXd to_u(const Eigen::VectorXd& t) const {
        const int K = 1 + P + Q;
        Eigen::VectorXd u(K);
        u[0] = std::log(t[0]);
        double slack = 1.0;
        for (int c = 1; c < K; ++c) slack -= t[c];
        for (int c = 1; c < K; ++c) u[c] = std::log(t[c] / slack);
        return u;
    }
    // d theta / d u.
    [[nodiscard]] Eigen::MatrixXd jacobian(const Eigen::VectorXd& t) const {
        const int K = 1 + P + Q;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(K, K);
        J(0, 0) = t[0];
        for (int i = 1; i < K; ++i)
            for (int j = 1; j < K; ++j) J(i, j) = t[i] * ((i == j ? 1.0 : 0.0) - t[j]);
        return J;
    }
};

struct Problem {
    std::span<const double> x;
    double v;
    Transform tr;
    double scale;  // 1 / n keeps the objective O(1)
};

// Pre-sample sigma^2 and X^2: the mean square, i.e. the variance of a zero-mean series.
double presample(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s / static_cast<double>(x.size());
}

Eigen::VectorXd to_eigen(const gsl_vector* g) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(g->size));
    for (std::size_t i = 0; i < g->size; ++i) e[static_cast<Eigen::Index>(i)] = gsl_vector_get(g, i);
    return e;
}

void objective_fdf(const gsl_vector* u, void* params, double* f, gsl_vector* g) {
    const auto& pr = *static_cast<const Problem*>(params);
    const Eigen::VectorXd uu = to_eigen(u);
    const Eigen::VectorXd t = pr.tr.to_theta(uu);
    if (!t.allFinite() || !(t[0] > 0.0)) {
        if (f) *f = std::numeric_limits<double>::infinity();
        if (g) gsl_vector_set_zero(g);
        return;
    }
    const auto ev = evaluate(t, pr.tr.P, pr.tr.Q, pr.x, pr.v, g != nullptr);
    if (f) *f = ev.nll * pr.scale;
    if (g) {
        const Eigen::VectorXd gu = pr.tr.jacobian(t).transpose() * ev.grad * pr.scale;
        for (Eigen::Index i = 0; i < gu.size(); ++i) gsl_vector_set(g, static_cast<std::size_t>(i), gu[i]);
    }
}

double objective_f(const gsl_vector* u, void* params) {
    double f = 0.0;
    objective_fdf(u, params, &f, nullptr);
    return f;
}

void objective_df(const gsl_vector* u, void* params, gsl_vector* g) { objective_fdf(u, params, nullptr, g); }

struct Run {
    Eigen::VectorXd theta;
    double nll = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

Run minimize(const Problem& pr, const Eigen::VectorXd& theta0, int max_iter) {
    const int K = 1 + pr.tr.P + pr.tr.Q;
    const Eigen::VectorXd u0 = pr.tr.to_u(theta0);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> u(gsl_vector_alloc(static_cast<std::size_t>(K)),
                                                               gsl_vector_free);
    for (int c = 0; c < K; ++c) gsl_vector_set(u.get(), static_cast<std::size_t>(c), u0[c]);
    std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, static_cast<std::size_t>(K)),
        gsl_multimin_fdfminimizer_free);
    gsl_multimin_function_fdf fn;
    fn.n = static_cast<std::size_t>(K);
    fn.f = objective_f;
    fn.df = objective_df;
    fn.fdf = objective_fdf;
    fn.params = const_cast<Problem*>(&pr);
    gsl_multimin_fdfminimizer_set(s.get(), &fn, u.get(), 0.1, 0.1);

    Run r;
    for (int it = 0; it < max_iter; ++it) {
        r.iterations = it + 1;
        const int status = gsl_multimin_fdfminimizer_iterate(s.get());
        const double gnorm = gsl_blas_dnrm2(gsl_multimin_fdfminimizer_gradient(s.get()));
        if (gsl_multimin_test_gradient(gsl_multimin_fdfminimizer_gradient(s.get()), 1e-6) == GSL_SUCCESS) {
            r.converged = true;
            break;
        }
        if (status != GSL_SUCCESS) {
            // Line search cannot progress: accept if the gradient is already negligible.
            r.converged = gnorm < 1e-4;
            break;
        }
    }
    r.theta = pr.tr.to_theta(to_eigen(gsl_multimin_fdfminimizer_x(s.get())));
    r.nll = gsl_multimin_fdfminimizer_minimum(s.get()) / pr.scale;
    return r;
}

std::vector<Eigen::VectorXd> starting_points(int P, int Q, double v) {
    std::vector<std::pair<double, double>> sums;
    if (Q > 0)
        sums = {{0.05, 0.90}, {0.15, 0.75}, {0.30, 0.40}, {0.05, 0.50}, {0.02, 0.97}, {1e-4, 1e-4}};
    else
        sums = {{0.10, 0.0}, {0.30, 0.0}, {0.60, 0.0}, {1e-4, 0.0}};
    std::vector<Eigen::VectorXd> out;
    for (auto [sb, sa] : sums) {
        Eigen::VectorXd t(1 + P + Q);
        // Geometric split across lags, most weight on lag 1.
        auto split = [&](double total, int count, int offset) {
            double norm = 0.0;
            for (int i = 0; i < count; ++i) norm += std::pow(0.5, i);
            for (int i = 0; i < count; ++i) t[offset + i] = total * std::pow(0.5, i) / norm;
        };
        split(sb, P, 1);
        if (Q > 0) split(sa, Q, 1 + P);
        t[0] = v * (1.0 - sb - sa);
        out.push_back(t);
    }
    return out;
}

GarchModel to_model(const Eigen::VectorXd& t, int P, int Q) {
    GarchModel m;
    m.P = P;
    m.Q = Q;
    m.c0 = t[0];
    m.arch.assign(t.data() + 1, t.data() + 1 + P);
    m.garch.assign(t.data() + 1 + P, t.data() + 1 + P + Q);
    m.arch_se.assign(static_cast<std::size_t>(P), 0.0);
    m.garch_se.assign(static_cast<std::size_t>(Q), 0.0);
    return m;
}

Eigen::VectorXd to_theta(const GarchModel& m) {
    Eigen::VectorXd t(1 + m.P + m.Q);
    t[0] = m.c0;
    for (int i = 0; i < m.P; ++i) t[1 + i] = m.arch[static_cast<std::size_t>(i)];
    for (int j = 0; j < m.Q; ++j) t[1 + m.P + j] = m.garch[static_cast<std::size_t>(j)];
    return t;
}

void check_model(const GarchModel& m) {
    if (m.P < 1 || m.Q < 0) throw ArgumentError("GARCH orders need P >= 1 and Q >= 0");
    if (m.arch.size() != static_cast<std::size_t>(m.P) || m.garch.size() != static_cast<std::size_t>(m.Q))
        throw ArgumentError("GARCH coefficient counts do not match the orders");
    if (!(m.c0 > 0.0)) throw ArgumentError("GARCH c0 must be positive");
    for (double b : m.arch)
        if (!(b >= 0.0)) throw ArgumentError("GARCH ARCH coefficients must be nonnegative");
    for (double a : m.garch)
        if (!(a >= 0.0)) throw ArgumentError("GARCH coefficients must be nonnegative");
}

}  // namespace

double GarchModel::persistence() const {
    double s = 0.0;
    for (double b : arch) s += b;
    for (double a : garch) s += a;
    return s;
}

double GarchModel::unconditional_variance() const {
    const double p = persistence();
    return p < 1.0 ? c0 / (1.0 - p) : std::numeric_limits<double>::infinity();
}

std::string GarchModel::order_string() const { return "GARCH(" + std::to_string(P) + "," + std::to_string(Q) + ")"; }

GarchModel make_garch(double c0, std::vector<double> arch, std::vector<double> garch) {
    GarchModel m;
    m.P = static_cast<int>(arch.size());
    m.Q = static_cast<int>(garch.size());
    m.c0 = c0;
    m.arch_se.assign(arch.size(), 0.0);
    m.garch_se.assign(garch.size(), 0.0);
    m.arch = std::move(arch);
    m.garch = std::move(garch);
    check_model(m);
    if (!(m.persistence() < 1.0)) throw ArgumentError("GARCH persistence must be below 1");
    m.near_integrated_variance = m.persistence() > kNearIntegrated;
    return m;
}

std::vector<double> garch_conditional_variance(const GarchModel& model, std::span<const double> x) {
    check_model(model);
    if (x.empty()) return {};
    return evaluate(to_theta(model), model.P, model.Q, x, presample(x), false).sigma2;
}

double garch_log_likelihood(const GarchModel& model, std::span<const double> x) {
    check_model(model);
    if (x.empty()) throw ArgumentError("log-likelihood of an empty series");
    return -evaluate(to_theta(model), model.P, model.Q, x, presample(x), false).nll;
}

GarchFit fit_garch(const Series& x, int P, int Q, const GarchFitOptions& opts) {
    if (P < 1 || Q < 0) throw ArgumentError("GARCH orders need P >= 1 and Q >= 0");
    if (x.size() < kMinLength) throw ArgumentError("GARCH fit needs at least 1000 samples");
    if (opts.max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    const auto xs = x.values();
    if (!(variance(xs) > 0.0)) throw DegenerateInputError("GARCH fit of a constant series");
    const double v = presample(xs);

    gsl_set_error_handler_off();
    const Problem pr{xs, v, Transform{P, Q}, 1.0 / static_cast<double>(xs.size())};
    std::vector<Run> runs;
    for (const auto& t0 : starting_points(P, Q, v)) runs.push_back(minimize(pr, t0, opts.max_iterations));
    double best_nll = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) best_nll = std::min(best_nll, r.nll);
    // Starts whose likelihood ties with the best are equivalent up to unidentified
    // directions (a_j is unidentified when every b_i is zero); prefer converged runs,
    // then the least persistent solution.
    const double tie = 1e-9 * std::abs(best_nll) + 1e-6;
    auto persistence_of = [&](const Run& r) { return r.theta.tail(P + Q).sum(); };
    Run best;
    for (auto& r : runs) {
        if (!(r.nll <= best_nll + tie)) continue;
        const bool better = !std::isfinite(best.nll) || (r.converged && !best.converged) ||
                            (r.converged == best.converged && persistence_of(r) < persistence_of(best));
        if (better) best = r;
    }

    GarchFit fit;
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    auto& m = fit.model;
    m = to_model(best.theta, P, Q);
    m.n_fit = xs.size();
    const auto ev = evaluate(best.theta, P, Q, xs, v, true);
    m.log_likelihood = -ev.nll;
    const int k = m.free_parameter_count();
    m.aic = 2.0 * k - 2.0 * m.log_likelihood;
    m.bic = k * std::log(static_cast<double>(xs.size())) - 2.0 * m.log_likelihood;
    m.nonstationary_variance = m.persistence() >= 1.0 - 1e-6;
    m.near_integrated_variance = m.persistence() > kNearIntegrated;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ev.info);
    Eigen::VectorXd se(k);
    if (eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 1e-14 * eig.eigenvalues().maxCoeff()) {
        const Eigen::MatrixXd cov =
            eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
        se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        se.setConstant(std::numeric_limits<double>::infinity());
    }
    m.c0_se = se[0];
    for (int i = 0; i < P; ++i) m.arch_se[static_cast<std::size_t>(i)] = se[1 + i];
    for (int j = 0; j < Q; ++j) m.garch_se[static_cast<std::size_t>(j)] = se[1 + P + j];

    fit.conditional_variance = ev.sigma2;
    std::vector<double> z(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) z[t] = xs[t] / std::sqrt(ev.sigma2[t]);
    fit.standardized = x.with_values(std::move(z));

    if (!best.converged) {
        throw GarchEstimationError("GARCH estimation did not converge in " + std::to_string(opts.max_iterations) +
                                       " iterations",
                                   std::move(fit));
    }
    return fit;
}

GarchValidation validate_garch(const GarchModel& model, const Series& standardized, double alpha,
                               std::optional<int> lags) {
    check_model(model);
    const int L = lags ? *lags : default_whiteness_lags(standardized.size());
    GarchValidation v;
    v.residual_whiteness = whiteness_test(standardized, L, alpha);
    v.residual_whiteness.name = "garch_residual_whiteness";
    std::vector<double> sq(standardized.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = standardized[i] * standardized[i];
    v.squared_whiteness = whiteness_test(std::span<const double>(sq), L, alpha);
    v.squared_whiteness.name = "garch_squared_residual_whiteness";
    return v;
}

GarchSelection select_garch(const Series& x, const GarchSweepOptions& opts) {
    if (opts.P_values.empty() || opts.Q_values.empty()) throw ArgumentError("empty GARCH order grid");
    struct Slot {
        int P, Q;
        std::optional<GarchFit> fit;
        bool converged = false;
        std::optional<GarchValidation> validation;
    };
    std::vector<Slot> grid;
    for (int P : opts.P_values)
        for (int Q : opts.Q_values) grid.push_back({P, Q, std::nullopt, false, std::nullopt});
    detail::parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
        auto& g = grid[i];
        try {
            g.fit = fit_garch(x, g.P, g.Q, opts.fit);
            g.converged = true;
        } catch (const GarchEstimationError& e) {
            g.fit = e.best_so_far();
        }
        g.validation = validate_garch(g.fit->model, g.fit->standardized, opts.alpha);
    });

    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return grid[a].fit->model.aic < grid[b].fit->model.aic; });
    GarchSelection out;
    for (std::size_t i : order) {
        const auto& g = grid[i];
        out.candidates.push_back({g.P, g.Q, g.fit->model.aic, g.converged && g.validation->accepted(), g.converged});
    }
    for (std::size_t i : order) {
        if (grid[i].converged && grid[i].validation->accepted()) {
            out.selected = *grid[i].fit;
            out.validation = *grid[i].validation;
            return out;
        }
    }
    const auto& fallback = grid[order.front()];
    out.selected = *fallback.fit;
    out.selected.model.not_validated = true;
    out.validation = *fallback.validation;
    return out;
}

Series simulate_garch(const GarchModel& model, std::size_t n, std::uint64_t seed, double sample_rate) {
    check_model(model);
    if (n < 1) throw ArgumentError("n must be >= 1");
    if (!(model.persistence() < 1.0)) throw ArgumentError("GARCH persistence must be below 1 to simulate");
    Rng rng(seed);
    const std::size_t total = n + kGarchBurnIn;
    const auto eps = rng.normals(total);
    const double v = model.unconditional_variance();
    std::vector<double> x(total), s2(total);
    for (std::size_t k = 0; k < total; ++k) {
        double s = model.c0;
        for (int i = 1; i <= model.P; ++i) {
            const double xx = k >= static_cast<std::size_t>(i) ? x[k - i] * x[k - i] : v;
            s += model.arch[static_cast<std::size_t>(i - 1)] * xx;
        }
        for (int j = 1; j <= model.Q; ++j) {
            const double prev = k >= static_cast<std::size_t>(j) ? s2[k - j] : v;
            s += model.garch[static_cast<std::size_t>(j - 1)] * prev;
        }
        s2[k] = s;
        x[k] = std::sqrt(s) * eps[k];
    }
    return Series(std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(kGarchBurnIn), x.end()), sample_rate);
}

Series simulate_arima(const ArimaModel& model, const GarchModel& innovations, std::size_t n, std::uint64_t seed,
                      double sample_rate) {
    if (n < 1) throw ArgumentError("n must be >= 1");
    if (!is_stationary(model) || !is_invertible(model)) throw ArgumentError("model violates stationarity or invertibility");
    const auto e = simulate_garch(innovations, n + arima_burn_in(model), seed);
    return filter_arima(model, e.values(), sample_rate);
}

}  // namespace seisnoise

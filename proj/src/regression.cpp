#include "regression.hpp"

#include "seisnoise/errors.hpp"

namespace seisnoise::detail {

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows();
    const auto k = X.cols();
    if (n <= k) throw DegenerateInputError("regression has no residual degrees of freedom");

    // Normal equations on column-scaled regressors; k is small and n large.
    Eigen::VectorXd scale(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double norm = X.col(j).norm();
        scale(j) = norm > 0.0 ? 1.0 / norm : 0.0;
    }
    if ((scale.array() == 0.0).any()) throw DegenerateInputError("regressor column is identically zero");

    const Eigen::MatrixXd Xs = X * scale.asDiagonal();
    const Eigen::MatrixXd xtx = Xs.transpose() * Xs;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtx);
    qr.setThreshold(1e-12);
    if (qr.rank() < k) throw DegenerateInputError("singular regression design");

    OlsFit fit;
    const Eigen::VectorXd beta_s = qr.solve(Xs.transpose() * y);
    fit.beta = scale.asDiagonal() * beta_s;
    fit.residuals = y - X * fit.beta;
    fit.rss = fit.residuals.squaredNorm();
    fit.sigma2 = fit.rss / static_cast<double>(n - k);

    const Eigen::MatrixXd inv_s = qr.inverse();
    fit.std_errors.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        fit.std_errors(j) = std::sqrt(fit.sigma2 * inv_s(j, j)) * scale(j);
    }

    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - fit.rss / tss : 0.0;
    return fit;
}

}  // namespace seisnoise::detail

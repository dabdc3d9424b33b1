#pragma once

#include <Eigen/Dense>

namespace seisnoise::detail {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    Eigen::VectorXd std_errors;
    double rss = 0.0;
    double sigma2 = 0.0;  // rss / (n - k)
    double r_squared = 0.0;
};

/// Ordinary least squares; throws DegenerateInputError on a rank-deficient design.
OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace seisnoise::detail

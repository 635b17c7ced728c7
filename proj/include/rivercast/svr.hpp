#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>

namespace rivercast {

struct SvrConfig {
    double c = 100.0;
    double epsilon = 0.01;
    double gamma = 1e-3;
    double tol = 1e-3;
    std::size_t max_iter = 10'000'000;
    /// Kernel-row cache budget.
    std::size_t cache_mb = 256;
};

/// Epsilon-insensitive support vector regressor with an RBF kernel:
/// f(x) = sum_i alpha_i K(x, sv_i) + bias.
struct SvrModel {
    Eigen::MatrixXd support_vectors;  // one row per support vector
    Eigen::VectorXd alphas;           // alpha_i - alpha_i^*, |alpha| <= c
    double bias = 0.0;
    double gamma = 1e-3;
    double c = 100.0;
    double epsilon = 0.01;
    bool converged = true;
    std::size_t iterations = 0;
};

/// exp(-gamma * ||x - y||^2).
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

/// Sequential minimal optimization on the dual. Each step updates the pair
/// that violates the KKT conditions the most and stops once the violation
/// gap drops below `tol`. `converged` is false when max_iter ran out first.
SvrModel svr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrConfig& config = {});

double svr_predict(const SvrModel& model, std::span<const double> x);

Eigen::VectorXd svr_predict(const SvrModel& model, const Eigen::MatrixXd& x);

}  // namespace rivercast

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace rivercast {

struct GbtConfig {
    int n_estimators = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double lambda = 1.0;       // L2 penalty on leaf weights
    double gamma_split = 0.0;  // penalty per split
    double subsample = 1.0;    // row fraction per tree
    double colsample = 1.0;    // feature fraction per tree
    std::uint64_t seed = 0;

    void validate() const;
};

/// Internal nodes route x[feature] < threshold to `left`; leaves carry `weight`.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    int depth() const;
};

struct GbtModel {
    std::vector<RegressionTree> trees;
    double base_score = 0.0;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double gamma_split = 0.0;
    int max_depth = 3;
    double subsample = 1.0;
    double colsample = 1.0;
    std::size_t n_features = 0;
};

/// Structure-score gain of splitting a node into (left, right):
/// 1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma_split.
/// A term whose denominator is zero contributes zero.
double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                  double gamma_split);

/// Boosted regression trees on squared-error loss with second-order statistics.
/// Leaf weight -G/(H + lambda); splits by exact greedy search over sorted unique
/// values, accepted only when the gain is positive. base_score = mean(y).
GbtModel gbt_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& config = {});

/// Same, also recording the training mean squared error after each tree.
GbtModel gbt_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& config,
                 std::vector<double>* loss_history);

/// base_score + learning_rate * sum_t tree_t(x).
double gbt_predict(const GbtModel& model, std::span<const double> x);

Eigen::VectorXd gbt_predict(const GbtModel& model, const Eigen::MatrixXd& x);

}  // namespace rivercast

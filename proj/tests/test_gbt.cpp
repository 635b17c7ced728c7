#include "doctest.h"

#include "rivercast/error.hpp"
#include "rivercast/gbt.hpp"
#include "rivercast/rng.hpp"

#include <cmath>
#include <vector>

using namespace rivercast;

namespace {

void step_data(Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    x.resize(20, 1);
    y.resize(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 0) = -1.0 + i * 0.1;
        y(i) = x(i, 0) < 0.0 ? 0.0 : 10.0;
    }
}

void noisy_data(std::uint64_t seed, Eigen::MatrixXd& x, Eigen::VectorXd& y, Eigen::Index n = 150) {
    Rng rng(seed);
    x.resize(n, 4);
    y.resize(n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = std::sin(2.0 * x(i, 0)) + x(i, 1) * x(i, 2) + 0.3 * rng.normal();
    }
}

}  // namespace

TEST_SUITE("gbt") {

TEST_CASE("split gain closed form") {
    CHECK(split_gain(0, 3, 0, 5, 1.0, 0.7) == -0.7);
    CHECK(split_gain(-2, 2, 2, 2, 0.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(split_gain(1.5, 2, 1.5, 2, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(split_gain(1.5, 2, 1.5, 2, 0.0, 0.0) <= 1e-15);
    CHECK(split_gain(3, 0, 0, 0, 0.0, 0.0) == 0.0);
    // lambda enters every denominator: 1/2 [1/2 + 4/3 - 9/4] = -5/24.
    CHECK(split_gain(1, 1, 2, 2, 1.0, 0.0) == doctest::Approx(-5.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("depth-0 single tree equals the mean") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    noisy_data(2, x, y, 37);
    GbtConfig cfg;
    cfg.n_estimators = 1;
    cfg.max_depth = 0;
    cfg.learning_rate = 1.0;
    cfg.lambda = 0.0;
    const auto m = gbt_fit(x, y, cfg);
    REQUIRE(m.trees.size() == 1);
    CHECK(m.trees[0].nodes.size() == 1);
    CHECK(m.trees[0].depth() == 0);
    const double mean = y.mean();
    const Eigen::VectorXd p = gbt_predict(m, x);
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p(i) == doctest::Approx(mean).epsilon(1e-15));
}

TEST_CASE("step data is fitted exactly") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    step_data(x, y);
    GbtConfig cfg;
    cfg.n_estimators = 200;
    cfg.max_depth = 1;
    cfg.learning_rate = 0.3;
    std::vector<double> loss;
    const auto m = gbt_fit(x, y, cfg, &loss);
    REQUIRE(loss.size() == 200);
    CHECK(loss.back() < 1e-6);
    const Eigen::VectorXd p = gbt_predict(m, x);
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(std::fabs(p(i) - y(i)) < 1e-3);
    // The first stump splits between -0.1 and 0.
    const auto& root = m.trees[0].nodes[0];
    CHECK(root.feature == 0);
    CHECK(root.threshold > -0.1);
    CHECK(root.threshold <= 0.0);
    // Leaf weights -G/(H + lambda) around base 5: residuals -5 on 10 rows and +5 on 10 rows.
    const auto& left = m.trees[0].nodes[static_cast<std::size_t>(root.left)];
    const auto& right = m.trees[0].nodes[static_cast<std::size_t>(root.right)];
    CHECK(left.weight == doctest::Approx(-50.0 / 11.0).epsilon(1e-14));
    CHECK(right.weight == doctest::Approx(50.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("training loss never increases over 200 trees") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    noisy_data(5, x, y);
    for (int depth : {1, 3, 5}) {
        GbtConfig cfg;
        cfg.n_estimators = 200;
        cfg.max_depth = depth;
        std::vector<double> loss;
        gbt_fit(x, y, cfg, &loss);
        REQUIRE(loss.size() == 200);
        for (std::size_t k = 1; k < loss.size(); ++k) CHECK(loss[k] <= loss[k - 1]);
    }
}

TEST_CASE("trees respect max_depth and have finite weights") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    noisy_data(6, x, y);
    GbtConfig cfg;
    cfg.max_depth = 3;
    cfg.subsample = 0.8;
    cfg.colsample = 0.5;
    cfg.seed = 77;
    const auto m = gbt_fit(x, y, cfg);
    for (const auto& tree : m.trees) {
        CHECK(tree.depth() <= 3);
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) CHECK(std::isfinite(node.weight));
            else {
                CHECK(node.left > 0);
                CHECK(node.right > 0);
                CHECK(std::isfinite(node.threshold));
            }
        }
    }
}

TEST_CASE("subsampling is deterministic per seed") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    noisy_data(7, x, y);
    GbtConfig cfg;
    cfg.subsample = 0.8;
    cfg.colsample = 0.8;
    cfg.seed = 1;
    const Eigen::VectorXd a = gbt_predict(gbt_fit(x, y, cfg), x);
    const Eigen::VectorXd b = gbt_predict(gbt_fit(x, y, cfg), x);
    CHECK(a == b);
    cfg.seed = 2;
    const Eigen::VectorXd c = gbt_predict(gbt_fit(x, y, cfg), x);
    CHECK(a != c);
}

TEST_CASE("prediction sums scaled tree outputs") {
    GbtModel m;
    m.base_score = 3.0;
    m.learning_rate = 0.5;
    m.n_features = 2;
    CHECK(gbt_predict(m, std::vector<double>{1.0, 2.0}) == 3.0);
    RegressionTree leaf;
    leaf.nodes.push_back(TreeNode{-1, 0.0, -1, -1, 4.0});
    m.trees.push_back(leaf);
    CHECK(gbt_predict(m, std::vector<double>{1.0, 2.0}) == 5.0);
    RegressionTree stump;
    stump.nodes = {TreeNode{1, 1.5, 1, 2, 0.0}, TreeNode{-1, 0.0, -1, -1, -2.0}, TreeNode{-1, 0.0, -1, -1, 6.0}};
    m.trees.push_back(stump);
    CHECK(gbt_predict(m, std::vector<double>{0.0, 1.0}) == 4.0);
    CHECK(gbt_predict(m, std::vector<double>{0.0, 1.5}) == 8.0);
    CHECK_THROWS_AS(gbt_predict(m, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("invalid configurations and inputs") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    step_data(x, y);
    GbtConfig cfg;
    cfg.learning_rate = 1.5;
    CHECK_THROWS_AS(gbt_fit(x, y, cfg), ConfigError);
    cfg = {};
    cfg.subsample = 0.0;
    CHECK_THROWS_AS(gbt_fit(x, y, cfg), ConfigError);
    cfg = {};
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(gbt_fit(x, y, cfg), ConfigError);
    y(3) = INFINITY;
    CHECK_THROWS_AS(gbt_fit(x, y), DataError);
}

}  // TEST_SUITE

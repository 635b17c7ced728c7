#include "rivercast/gbt.hpp"

#include "rivercast/error.hpp"
#include "rivercast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rivercast {

namespace {

struct Builder {
    const Eigen::MatrixXd& x;
    const std::vector<double>& grad;
    const GbtConfig& config;
    const std::vector<int>& features;
    RegressionTree tree;

    double leaf_weight(double g, double h) const {
        const double denom = h + config.lambda;
        return denom > 0.0 ? -g / denom : 0.0;
    }

    int build(std::vector<std::size_t>& rows, int depth) {
        double g = 0.0;
        for (auto r : rows) g += grad[r];
        const double h = static_cast<double>(rows.size());  // squared loss: h_i = 1

        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[static_cast<std::size_t>(index)].weight = leaf_weight(g, h);
        if (depth >= config.max_depth || rows.size() < 2) return index;

        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order = rows;
        for (int f : features) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
            });
            double gl = 0.0, hl = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                gl += grad[order[k]];
                hl += 1.0;
                const double lo = x(static_cast<Eigen::Index>(order[k]), f);
                const double hi = x(static_cast<Eigen::Index>(order[k + 1]), f);
                if (!(lo < hi)) continue;
                const double gain = split_gain(gl, hl, g - gl, h - hl, config.lambda, config.gamma_split);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid > lo)) mid = hi;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (x(static_cast<Eigen::Index>(r), best_feature) < best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int rr = build(right, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = rr;
        return index;
    }
};

double training_mse(const std::vector<double>& pred, const Eigen::VectorXd& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - y(static_cast<Eigen::Index>(i));
        s += e * e;
    }
    return s / static_cast<double>(pred.size());
}

}  // namespace

void GbtConfig::validate() const {
    if (n_estimators < 0) throw ConfigError("n_estimators must be >= 0");
    if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
    if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
        throw ConfigError("learning_rate must lie in [0, 1]");
    }
    if (!(lambda >= 0.0) || !(gamma_split >= 0.0)) throw ConfigError("lambda and gamma must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0) || !(colsample > 0.0 && colsample <= 1.0)) {
        throw ConfigError("subsample and colsample must lie in (0, 1]");
    }
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                          : n.right);
    }
    return nodes[i].weight;
}

int RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
    int deepest = 0;
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
            stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
        }
    }
    return deepest;
}

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                  double gamma_split) {
    const auto term = [lambda](double g, double h) {
        const double denom = h + lambda;
        return denom > 0.0 ? g * g / denom : 0.0;
    };
    return 0.5 * (term(g_left, h_left) + term(g_right, h_right) -
                  term(g_left + g_right, h_left + h_right)) -
           gamma_split;
}

GbtModel gbt_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& config) {
    return gbt_fit(x, y, config, nullptr);
}

GbtModel gbt_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& config,
                 std::vector<double>* loss_history) {
    config.validate();
    if (x.rows() != y.size() || x.rows() == 0) {
        throw DimensionError("gbt_fit needs rows(X) = len(y) >= 1");
    }
    if (!x.allFinite() || !y.allFinite()) throw DataError("gbt_fit inputs must be finite");

    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<int>(x.cols());
    GbtModel model;
    model.base_score = y.mean();
    model.learning_rate = config.learning_rate;
    model.lambda = config.lambda;
    model.gamma_split = config.gamma_split;
    model.max_depth = config.max_depth;
    model.subsample = config.subsample;
    model.colsample = config.colsample;
    model.n_features = static_cast<std::size_t>(d);

    std::vector<double> pred(n, model.base_score), grad(n);
    Rng row_rng = Rng::stream(config.seed, "gbt.rows");
    Rng col_rng = Rng::stream(config.seed, "gbt.columns");
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    std::vector<int> all_features(static_cast<std::size_t>(d));
    std::iota(all_features.begin(), all_features.end(), 0);
    const auto n_rows = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(config.subsample * static_cast<double>(n))));
    const auto n_cols = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.colsample * static_cast<double>(d))));

    std::vector<double> row(static_cast<std::size_t>(d));
    for (int t = 0; t < config.n_estimators; ++t) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y(static_cast<Eigen::Index>(i));

        std::vector<std::size_t> rows = all_rows;
        if (n_rows < n) {
            shuffle(rows, row_rng);
            rows.resize(n_rows);
            std::sort(rows.begin(), rows.end());
        }
        std::vector<int> features = all_features;
        if (n_cols < features.size()) {
            shuffle(features, col_rng);
            features.resize(n_cols);
            std::sort(features.begin(), features.end());
        }

        Builder builder{x, grad, config, features, {}};
        builder.build(rows, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < d; ++c) row[static_cast<std::size_t>(c)] = x(static_cast<Eigen::Index>(i), c);
            pred[i] += config.learning_rate * builder.tree.predict(row);
        }
        model.trees.push_back(std::move(builder.tree));
        if (loss_history) loss_history->push_back(training_mse(pred, y));
    }
    return model;
}

double gbt_predict(const GbtModel& model, std::span<const double> x) {
    if (x.size() != model.n_features) {
        throw DimensionError("gbt_predict expects " + std::to_string(model.n_features) +
                             " features, got " + std::to_string(x.size()));
    }
    double sum = 0.0;
    for (const auto& tree : model.trees) sum += tree.predict(x);
    return model.base_score + model.learning_rate * sum;
}

Eigen::VectorXd gbt_predict(const GbtModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
        out(r) = gbt_predict(model, row);
    }
    return out;
}

}  // namespace rivercast

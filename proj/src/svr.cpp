#include "rivercast/svr.hpp"

#include "rivercast/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <string>
#include <vector>

namespace rivercast {

namespace {

constexpr double kTau = 1e-12;

/// Lazily computed kernel rows with least-recently-used eviction.
class KernelCache {
public:
    KernelCache(const Eigen::MatrixXd& x, double gamma, std::size_t budget_bytes)
        : x_(x), gamma_(gamma), rows_(static_cast<std::size_t>(x.rows())),
          where_(rows_.size(), lru_.end()) {
        const std::size_t row_bytes = std::max<std::size_t>(1, rows_.size() * sizeof(double));
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
        norms_ = x_.rowwise().squaredNorm();
    }

    const std::vector<double>& row(std::size_t i) {
        if (!rows_[i].empty()) {
            lru_.splice(lru_.begin(), lru_, where_[i]);
            return rows_[i];
        }
        if (lru_.size() >= capacity_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            rows_[victim].clear();
            rows_[victim].shrink_to_fit();
            where_[victim] = lru_.end();
        }
        auto& r = rows_[i];
        r.resize(rows_.size());
        const Eigen::VectorXd dots = x_ * x_.row(static_cast<Eigen::Index>(i)).transpose();
        const double ni = norms_(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < r.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double d2 = std::max(0.0, ni + norms_(jj) - 2.0 * dots(jj));
            r[j] = j == i ? 1.0 : std::exp(-gamma_ * d2);
        }
        lru_.push_front(i);
        where_[i] = lru_.begin();
        return r;
    }

private:
    const Eigen::MatrixXd& x_;
    double gamma_;
    Eigen::VectorXd norms_;
    std::vector<std::vector<double>> rows_;
    std::list<std::size_t> lru_;
    std::vector<std::list<std::size_t>::iterator> where_;
    std::size_t capacity_ = 2;
};

}  // namespace

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size()) {
        throw DimensionError("rbf_kernel dimension mismatch: " + std::to_string(x.size()) + " vs " +
                             std::to_string(y.size()));
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

SvrModel svr_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvrConfig& config) {
    if (x.rows() != y.size() || x.rows() == 0) {
        throw DimensionError("svr_fit needs rows(X) = len(y) >= 1");
    }
    if (!x.allFinite() || !y.allFinite()) throw DataError("svr_fit inputs must be finite");
    if (!(config.c > 0.0) || !(config.epsilon >= 0.0) || !(config.gamma >= 0.0) ||
        !(config.tol > 0.0)) {
        throw ConfigError("svr_fit needs c > 0, epsilon >= 0, gamma >= 0, tol > 0");
    }

    // Variables 0..l-1 are alpha_i (sign +1), l..2l-1 are alpha_i^* (sign -1).
    const std::size_t l = static_cast<std::size_t>(x.rows());
    const std::size_t n = 2 * l;
    const double c = config.c;
    std::vector<double> alpha(n, 0.0), grad(n);
    std::vector<signed char> sign(n);
    for (std::size_t t = 0; t < l; ++t) {
        sign[t] = 1;
        sign[t + l] = -1;
        grad[t] = config.epsilon - y(static_cast<Eigen::Index>(t));
        grad[t + l] = config.epsilon + y(static_cast<Eigen::Index>(t));
    }
    KernelCache cache(x, config.gamma, config.cache_mb << 20);
    const auto in_up = [&](std::size_t t) { return sign[t] > 0 ? alpha[t] < c : alpha[t] > 0.0; };
    const auto in_low = [&](std::size_t t) { return sign[t] > 0 ? alpha[t] > 0.0 : alpha[t] < c; };

    SvrModel model;
    model.gamma = config.gamma;
    model.c = c;
    model.epsilon = config.epsilon;
    model.converged = false;

    std::size_t iter = 0;
    for (; iter < config.max_iter; ++iter) {
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -sign[t] * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        if (i == n || j == n || g_max - g_min < config.tol) {
            model.converged = true;
            break;
        }

        const auto& ki = cache.row(i % l);
        const double kij = ki[j % l];
        const double old_ai = alpha[i], old_aj = alpha[j];
        // Two-variable subproblem with box [0, c] and the equality constraint.
        if (sign[i] != sign[j]) {
            const double qij = sign[i] * sign[j] * kij;
            const double quad = std::max(2.0 + 2.0 * qij, kTau);
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            const double qij = sign[i] * sign[j] * kij;
            const double quad = std::max(2.0 - 2.0 * qij, kTau);
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        const auto& kj = cache.row(j % l);
        const auto& kii = cache.row(i % l);
        const double si = sign[i] * dai;
        const double sj = sign[j] * daj;
        for (std::size_t b = 0; b < l; ++b) {
            const double d = si * kii[b] + sj * kj[b];
            grad[b] += d;
            grad[b + l] -= d;
        }
    }
    model.iterations = iter;

    // Bias from free variables; midpoint of the KKT bounds when none are free.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = sign[t] * grad[t];
        if (alpha[t] >= c) {
            if (sign[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (sign[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    model.bias = -rho;

    std::vector<std::size_t> support;
    for (std::size_t t = 0; t < l; ++t) {
        if (alpha[t] - alpha[t + l] != 0.0) support.push_back(t);
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(support.size()), x.cols());
    model.alphas.resize(static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) {
        const auto row = static_cast<Eigen::Index>(s);
        model.support_vectors.row(row) = x.row(static_cast<Eigen::Index>(support[s]));
        model.alphas(row) = alpha[support[s]] - alpha[support[s] + l];
    }
    return model;
}

double svr_predict(const SvrModel& model, std::span<const double> x) {
    if (model.support_vectors.rows() > 0 &&
        static_cast<Eigen::Index>(x.size()) != model.support_vectors.cols()) {
        throw DimensionError("svr_predict dimension mismatch");
    }
    double sum = model.bias;
    const auto dim = static_cast<std::size_t>(model.support_vectors.cols());
    for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = x[k] - model.support_vectors(s, static_cast<Eigen::Index>(k));
            d2 += d * d;
        }
        sum += model.alphas(s) * std::exp(-model.gamma * d2);
    }
    return sum;
}

Eigen::VectorXd svr_predict(const SvrModel& model, const Eigen::MatrixXd& x) {
    Eigen::VectorXd out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
        out(r) = svr_predict(model, row);
    }
    return out;
}

}  // namespace rivercast

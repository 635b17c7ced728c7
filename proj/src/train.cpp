#include "rivercast/train.hpp"

#include "rivercast/error.hpp"
#include "rivercast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rivercast {

std::string to_string(Optimizer optimizer) {
    return optimizer == Optimizer::sgd ? "sgd" : "adam";
}

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw ConfigError("unknown optimizer: " + name);
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("learning_rate must be finite and nonnegative");
    }
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(gradient_clip_norm >= 0.0)) throw ConfigError("gradient_clip_norm must be >= 0");
}

std::vector<double> train(NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (x.rows() == 0) throw DataError("no training rows");
    if (x.rows() != y.rows()) throw DimensionError("inputs and targets differ in row count");

    std::vector<double> params = flatten(model);
    const std::size_t n_params = params.size();
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0), grad;
    std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::stream(config.seed, "train.shuffle");
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uint64_t step = 0;

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(config.epochs));
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t len = std::min(batch, order.size() - start);
            const std::span<const std::size_t> rows(order.data() + start, len);
            const double loss = batch_loss(model, x, y, rows, &grad);
            if (!std::isfinite(loss)) {
                throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch + 1),
                                      epoch + 1);
            }
            total += loss * static_cast<double>(len);

            if (config.gradient_clip_norm > 0.0) {
                double norm2 = 0.0;
                for (double g : grad) norm2 += g * g;
                const double norm = std::sqrt(norm2);
                if (norm > config.gradient_clip_norm) {
                    const double s = config.gradient_clip_norm / norm;
                    for (double& g : grad) g *= s;
                }
            }
            ++step;
            if (config.optimizer == Optimizer::sgd) {
                for (std::size_t k = 0; k < n_params; ++k) params[k] -= config.learning_rate * grad[k];
            } else {
                const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
                for (std::size_t k = 0; k < n_params; ++k) {
                    m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
                    v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
                    params[k] -= config.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + adam_eps);
                }
            }
            unflatten(model, params);
        }
        const double epoch_loss = total / static_cast<double>(order.size());
        history.push_back(epoch_loss);
        if (on_epoch) on_epoch(epoch + 1, epoch_loss);
    }
    return history;
}

FitResult fit(const NeuralArch& arch, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
              const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    FitResult result{init_model(arch, config.init_scheme, config.seed), {}};
    result.loss_history = train(result.model, x, y, config, on_epoch);
    return result;
}

double gradient_check(const NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<double> analytic;
    batch_loss(model, x, y, rows, &analytic);

    constexpr double step = 1e-5;
    NeuralModel probe = model;
    std::vector<double> params = flatten(model);
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + step;
        unflatten(probe, params);
        const double up = batch_loss(probe, x, y, rows, nullptr);
        params[k] = saved - step;
        unflatten(probe, params);
        const double down = batch_loss(probe, x, y, rows, nullptr);
        params[k] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({1.0, std::abs(analytic[k]), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    }
    return worst;
}

GradientCheckCase random_gradient_case(NeuralKind kind, std::uint64_t seed, int window, int samples) {
    Rng rng = Rng::stream(seed, "gradient_check.data");
    NeuralArch arch;
    arch.kind = kind;
    arch.output_size = 2;
    arch.forget_bias_one = false;
    int width = 0;
    if (kind == NeuralKind::mlp) {
        arch.input_size = 5;
        arch.hidden_layers = {6, 4};
        arch.hidden_activation = Activation::tanh;
        width = arch.input_size;
    } else {
        arch.input_size = 3;
        arch.hidden_size = 4;
        width = arch.input_size * window;
    }
    GradientCheckCase out{init_model(arch, InitScheme::glorot_uniform, seed), {}, {}};
    // Random biases as well, so every parameter is exercised away from zero.
    std::vector<double> params = flatten(out.model);
    for (double& p : params) p += 0.2 * rng.normal();
    unflatten(out.model, params);
    out.x.resize(samples, width);
    out.y.resize(samples, arch.output_size);
    for (Eigen::Index r = 0; r < out.x.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.x.cols(); ++c) out.x(r, c) = rng.normal();
        for (Eigen::Index c = 0; c < out.y.cols(); ++c) out.y(r, c) = rng.normal();
    }
    return out;
}

}  // namespace rivercast

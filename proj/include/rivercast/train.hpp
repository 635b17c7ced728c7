#pragma once

#include "rivercast/neural.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rivercast {

enum class Optimizer { sgd, adam };

std::string to_string(Optimizer optimizer);
Optimizer optimizer_from_string(const std::string& name);

struct TrainConfig {
    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 100;
    std::uint64_t seed = 0;
    double gradient_clip_norm = 5.0;  // 0 disables clipping
    InitScheme init_scheme = InitScheme::glorot_uniform;

    void validate() const;
};

struct FitResult {
    NeuralModel model;
    std::vector<double> loss_history;  // mean training loss per epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Minibatch training of an existing model on the mean squared error. Each epoch
/// shuffles all rows with a stream seeded by config.seed, clips the global
/// gradient norm, then applies SGD or Adam (beta1 0.9, beta2 0.999, eps 1e-8).
/// Throws DivergenceError on a non-finite loss.
std::vector<double> train(NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Initializes a network of shape `arch` from config.seed and trains it.
FitResult fit(const NeuralArch& arch, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Max over parameters of |g_a - g_n| / max(1, |g_a|, |g_n|), comparing the
/// analytic gradient of the full-data loss with central differences of step 1e-5.
double gradient_check(const NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Random instance for gradient checking: a small network of `kind` with random
/// weights and `samples` random input/target rows (`window` steps for recurrent kinds).
struct GradientCheckCase {
    NeuralModel model;
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
};

GradientCheckCase random_gradient_case(NeuralKind kind, std::uint64_t seed, int window = 6,
                                       int samples = 4);

}  // namespace rivercast

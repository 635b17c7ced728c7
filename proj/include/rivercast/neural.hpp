#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rivercast {

enum class Activation { identity, relu, tanh, sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// f(W x + b) with W: out x in.
struct DenseLayer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd biases;
    Activation activation = Activation::identity;

    Eigen::Index inputs() const { return weights.cols(); }
    Eigen::Index outputs() const { return weights.rows(); }
};

/// Layer composition; the last layer is linear.
struct MlpModel {
    std::vector<DenseLayer> layers;
};

/// LSTM gates act on the concatenation [h_{t-1}; x_t], so every gate matrix is
/// hidden x (hidden + input). The head maps the final hidden state to outputs.
struct LstmParams {
    Eigen::MatrixXd w_f, w_i, w_o, w_c;
    Eigen::VectorXd b_f, b_i, b_o, b_c;
    int hidden_size = 0;
    int input_size = 0;
    DenseLayer head;
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/// GRU reset/update gates act on [h_{t-1}; x_t]; the candidate acts on [r * h_{t-1}; x_t].
struct GruParams {
    Eigen::MatrixXd w_r, w_z, w_h;
    Eigen::VectorXd b_r, b_z, b_h;
    int hidden_size = 0;
    int input_size = 0;
    DenseLayer head;
};

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& x);

/// forget, input, output gates f, i, o = sigmoid(W [h; x] + b);
/// c_t = f * c_{t-1} + i * tanh(W_c [h; x] + b_c); h_t = o * tanh(c_t).
LstmState lstm_cell_step(const Eigen::VectorXd& x, const LstmState& state, const LstmParams& params);

/// r, z = sigmoid(W [h; x] + b); h' = tanh(W_h [r * h; x] + b_h);
/// h_t = (1 - z) * h_{t-1} + z * h'.
Eigen::VectorXd gru_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                              const GruParams& params);

/// Runs the cell over window rows (oldest first) from a zero state, then applies the head.
Eigen::VectorXd forward_sequence(const LstmParams& params, const Eigen::MatrixXd& window);
Eigen::VectorXd forward_sequence(const GruParams& params, const Eigen::MatrixXd& window);

enum class NeuralKind { mlp, lstm, gru };

std::string to_string(NeuralKind kind);

using NeuralModel = std::variant<MlpModel, LstmParams, GruParams>;

NeuralKind kind_of(const NeuralModel& model);

/// Shape of a network to initialize.
struct NeuralArch {
    NeuralKind kind = NeuralKind::mlp;
    int input_size = 1;    // flat features (mlp) or channels per step (recurrent)
    int output_size = 1;   // horizon
    std::vector<int> hidden_layers{50};           // mlp only
    Activation hidden_activation = Activation::relu;  // mlp only
    int hidden_size = 16;  // recurrent only
    bool forget_bias_one = true;  // lstm only; false gives strict all-zero biases
};

enum class InitScheme { glorot_uniform, zeros };

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero, LSTM forget bias 1
/// unless disabled.
NeuralModel init_model(const NeuralArch& arch, InitScheme scheme, std::uint64_t seed);

/// Parameters in a fixed order: each matrix row-major, then its bias vector.
std::vector<double> flatten(const NeuralModel& model);
void unflatten(NeuralModel& model, std::span<const double> values);
std::size_t parameter_count(const NeuralModel& model);

/// Mean-squared-error batch loss over rows `rows` of (x, y). Recurrent models read
/// each x row as `steps` blocks of input_size values. Fills `grad` (same order as
/// flatten) when non-null.
double batch_loss(const NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  std::span<const std::size_t> rows, std::vector<double>* grad);

/// Predictions for every row of x (one output row per input row).
Eigen::MatrixXd predict(const NeuralModel& model, const Eigen::MatrixXd& x);

}  // namespace rivercast

#include "rivercast/neural.hpp"

#include "rivercast/error.hpp"
#include "rivercast/rng.hpp"

#include <cmath>

namespace rivercast {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

MatrixXd activate(const MatrixXd& z, Activation a) {
    switch (a) {
        case Activation::identity: return z;
        case Activation::relu: return z.cwiseMax(0.0);
        case Activation::tanh: return z.array().tanh().matrix();
        case Activation::sigmoid: return sigmoid(z);
    }
    return z;
}

/// d activation / d pre-activation, from the pre-activation z and output a.
MatrixXd activation_slope(const MatrixXd& z, const MatrixXd& a, Activation act) {
    switch (act) {
        case Activation::identity: return MatrixXd::Ones(z.rows(), z.cols());
        case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
        case Activation::tanh: return (1.0 - a.array().square()).matrix();
        case Activation::sigmoid: return (a.array() * (1.0 - a.array())).matrix();
    }
    return MatrixXd::Ones(z.rows(), z.cols());
}

template <typename F>
void visit_tensors(DenseLayer& layer, F&& f) {
    f(layer.weights);
    f(layer.biases);
}

template <typename F>
void visit_tensors(MlpModel& m, F&& f) {
    for (auto& layer : m.layers) visit_tensors(layer, f);
}

template <typename F>
void visit_tensors(LstmParams& p, F&& f) {
    f(p.w_f); f(p.b_f);
    f(p.w_i); f(p.b_i);
    f(p.w_o); f(p.b_o);
    f(p.w_c); f(p.b_c);
    visit_tensors(p.head, f);
}

template <typename F>
void visit_tensors(GruParams& p, F&& f) {
    f(p.w_r); f(p.b_r);
    f(p.w_z); f(p.b_z);
    f(p.w_h); f(p.b_h);
    visit_tensors(p.head, f);
}

/// Zero-filled copy with identical shapes, used as a gradient accumulator.
template <typename Model>
Model zeros_like(const Model& model) {
    Model out = model;
    visit_tensors(out, [](auto& t) { t.setZero(); });
    return out;
}

template <typename Model>
std::vector<double> flatten_model(const Model& model) {
    std::vector<double> out;
    visit_tensors(const_cast<Model&>(model), [&](auto& t) {
        for (Index r = 0; r < t.rows(); ++r)
            for (Index c = 0; c < t.cols(); ++c) out.push_back(t(r, c));
    });
    return out;
}

void check_finite(const MatrixXd& m, const char* where) {
    if (!m.allFinite()) throw DataError(std::string("non-finite activation in ") + where);
}

/// Block of step s for rows `rows`: input_size x B.
MatrixXd step_block(const MatrixXd& x, std::span<const std::size_t> rows, Index s, Index input) {
    MatrixXd out(input, static_cast<Index>(rows.size()));
    for (std::size_t b = 0; b < rows.size(); ++b) {
        out.col(static_cast<Index>(b)) =
            x.row(static_cast<Index>(rows[b])).segment(s * input, input).transpose();
    }
    return out;
}

MatrixXd target_block(const MatrixXd& y, std::span<const std::size_t> rows) {
    MatrixXd out(y.cols(), static_cast<Index>(rows.size()));
    for (std::size_t b = 0; b < rows.size(); ++b) {
        out.col(static_cast<Index>(b)) = y.row(static_cast<Index>(rows[b])).transpose();
    }
    return out;
}

Index sequence_steps(const MatrixXd& x, int input_size) {
    if (input_size <= 0 || x.cols() == 0 || x.cols() % input_size != 0) {
        throw DimensionError("input width " + std::to_string(x.cols()) +
                             " is not a whole number of steps of " + std::to_string(input_size));
    }
    return x.cols() / input_size;
}

MatrixXd dense_apply(const DenseLayer& layer, const MatrixXd& in) {
    return activate((layer.weights * in).colwise() + layer.biases, layer.activation);
}

// Loss on outputs (O x B) against targets, and its gradient w.r.t. outputs.
double mse_loss(const MatrixXd& out, const MatrixXd& target, MatrixXd& d_out) {
    const double scale = 1.0 / static_cast<double>(out.size());
    const MatrixXd diff = out - target;
    d_out = 2.0 * scale * diff;
    return diff.squaredNorm() * scale;
}

double mlp_batch(const MlpModel& m, const MatrixXd& x, const MatrixXd& y,
                 std::span<const std::size_t> rows, MlpModel* grad) {
    if (m.layers.empty()) throw DimensionError("MLP has no layers");
    if (x.cols() != m.layers.front().inputs() || y.cols() != m.layers.back().outputs()) {
        throw DimensionError("MLP batch shape mismatch");
    }
    std::vector<MatrixXd> acts{step_block(x, rows, 0, x.cols())};
    std::vector<MatrixXd> pre;
    for (const auto& layer : m.layers) {
        pre.push_back((layer.weights * acts.back()).colwise() + layer.biases);
        acts.push_back(activate(pre.back(), layer.activation));
    }
    MatrixXd d;
    const double loss = mse_loss(acts.back(), target_block(y, rows), d);
    if (!grad) return loss;
    for (std::size_t l = m.layers.size(); l-- > 0;) {
        const MatrixXd dz = d.cwiseProduct(activation_slope(pre[l], acts[l + 1], m.layers[l].activation));
        grad->layers[l].weights += dz * acts[l].transpose();
        grad->layers[l].biases += dz.rowwise().sum();
        if (l > 0) d = m.layers[l].weights.transpose() * dz;
    }
    return loss;
}

double lstm_batch(const LstmParams& p, const MatrixXd& x, const MatrixXd& y,
                  std::span<const std::size_t> rows, LstmParams* grad) {
    const Index steps = sequence_steps(x, p.input_size);
    if (y.cols() != p.head.outputs()) throw DimensionError("LSTM target width mismatch");
    const Index hid = p.hidden_size;
    const auto batch = static_cast<Index>(rows.size());

    struct Step {
        MatrixXd z, f, i, o, g, c_prev, c, tanh_c;
    };
    std::vector<Step> trace(static_cast<std::size_t>(steps));
    MatrixXd h = MatrixXd::Zero(hid, batch);
    MatrixXd c = MatrixXd::Zero(hid, batch);
    for (Index s = 0; s < steps; ++s) {
        auto& st = trace[static_cast<std::size_t>(s)];
        st.z.resize(hid + p.input_size, batch);
        st.z.topRows(hid) = h;
        st.z.bottomRows(p.input_size) = step_block(x, rows, s, p.input_size);
        st.f = sigmoid((p.w_f * st.z).colwise() + p.b_f);
        st.i = sigmoid((p.w_i * st.z).colwise() + p.b_i);
        st.o = sigmoid((p.w_o * st.z).colwise() + p.b_o);
        st.g = ((p.w_c * st.z).colwise() + p.b_c).array().tanh().matrix();
        st.c_prev = c;
        c = st.f.cwiseProduct(c) + st.i.cwiseProduct(st.g);
        st.c = c;
        st.tanh_c = c.array().tanh().matrix();
        h = st.o.cwiseProduct(st.tanh_c);
    }
    const MatrixXd out = (p.head.weights * h).colwise() + p.head.biases;
    MatrixXd d_out;
    const double loss = mse_loss(out, target_block(y, rows), d_out);
    if (!grad) return loss;

    grad->head.weights += d_out * h.transpose();
    grad->head.biases += d_out.rowwise().sum();
    MatrixXd dh = p.head.weights.transpose() * d_out;
    MatrixXd dc = MatrixXd::Zero(hid, batch);
    for (Index s = steps; s-- > 0;) {
        const auto& st = trace[static_cast<std::size_t>(s)];
        const MatrixXd d_o = dh.cwiseProduct(st.tanh_c);
        dc += dh.cwiseProduct(st.o).cwiseProduct((1.0 - st.tanh_c.array().square()).matrix());
        const MatrixXd d_f = dc.cwiseProduct(st.c_prev);
        const MatrixXd d_i = dc.cwiseProduct(st.g);
        const MatrixXd d_g = dc.cwiseProduct(st.i);
        const MatrixXd a_f = d_f.array() * st.f.array() * (1.0 - st.f.array());
        const MatrixXd a_i = d_i.array() * st.i.array() * (1.0 - st.i.array());
        const MatrixXd a_o = d_o.array() * st.o.array() * (1.0 - st.o.array());
        const MatrixXd a_g = d_g.array() * (1.0 - st.g.array().square());
        const MatrixXd zt = st.z.transpose();
        grad->w_f += a_f * zt;
        grad->w_i += a_i * zt;
        grad->w_o += a_o * zt;
        grad->w_c += a_g * zt;
        grad->b_f += a_f.rowwise().sum();
        grad->b_i += a_i.rowwise().sum();
        grad->b_o += a_o.rowwise().sum();
        grad->b_c += a_g.rowwise().sum();
        const MatrixXd dz = p.w_f.transpose() * a_f + p.w_i.transpose() * a_i +
                            p.w_o.transpose() * a_o + p.w_c.transpose() * a_g;
        dh = dz.topRows(hid);
        dc = dc.cwiseProduct(st.f);
    }
    return loss;
}

double gru_batch(const GruParams& p, const MatrixXd& x, const MatrixXd& y,
                 std::span<const std::size_t> rows, GruParams* grad) {
    const Index steps = sequence_steps(x, p.input_size);
    if (y.cols() != p.head.outputs()) throw DimensionError("GRU target width mismatch");
    const Index hid = p.hidden_size;
    const auto batch = static_cast<Index>(rows.size());

    struct Step {
        MatrixXd h_prev, zin, r, u, cand_in, cand;
    };
    std::vector<Step> trace(static_cast<std::size_t>(steps));
    MatrixXd h = MatrixXd::Zero(hid, batch);
    for (Index s = 0; s < steps; ++s) {
        auto& st = trace[static_cast<std::size_t>(s)];
        const MatrixXd xs = step_block(x, rows, s, p.input_size);
        st.h_prev = h;
        st.zin.resize(hid + p.input_size, batch);
        st.zin.topRows(hid) = h;
        st.zin.bottomRows(p.input_size) = xs;
        st.r = sigmoid((p.w_r * st.zin).colwise() + p.b_r);
        st.u = sigmoid((p.w_z * st.zin).colwise() + p.b_z);
        st.cand_in.resize(hid + p.input_size, batch);
        st.cand_in.topRows(hid) = st.r.cwiseProduct(h);
        st.cand_in.bottomRows(p.input_size) = xs;
        st.cand = ((p.w_h * st.cand_in).colwise() + p.b_h).array().tanh().matrix();
        h = (1.0 - st.u.array()).matrix().cwiseProduct(h) + st.u.cwiseProduct(st.cand);
    }
    const MatrixXd out = (p.head.weights * h).colwise() + p.head.biases;
    MatrixXd d_out;
    const double loss = mse_loss(out, target_block(y, rows), d_out);
    if (!grad) return loss;

    grad->head.weights += d_out * h.transpose();
    grad->head.biases += d_out.rowwise().sum();
    MatrixXd dh = p.head.weights.transpose() * d_out;
    for (Index s = steps; s-- > 0;) {
        const auto& st = trace[static_cast<std::size_t>(s)];
        const MatrixXd d_u = dh.cwiseProduct(st.cand - st.h_prev);
        const MatrixXd d_cand = dh.cwiseProduct(st.u);
        MatrixXd dh_prev = dh.cwiseProduct((1.0 - st.u.array()).matrix());

        const MatrixXd a_cand = d_cand.array() * (1.0 - st.cand.array().square());
        grad->w_h += a_cand * st.cand_in.transpose();
        grad->b_h += a_cand.rowwise().sum();
        const MatrixXd d_cand_in = p.w_h.transpose() * a_cand;
        const MatrixXd d_rh = d_cand_in.topRows(hid);
        const MatrixXd d_r = d_rh.cwiseProduct(st.h_prev);
        dh_prev += d_rh.cwiseProduct(st.r);

        const MatrixXd a_u = d_u.array() * st.u.array() * (1.0 - st.u.array());
        const MatrixXd a_r = d_r.array() * st.r.array() * (1.0 - st.r.array());
        const MatrixXd zt = st.zin.transpose();
        grad->w_z += a_u * zt;
        grad->w_r += a_r * zt;
        grad->b_z += a_u.rowwise().sum();
        grad->b_r += a_r.rowwise().sum();
        const MatrixXd d_zin = p.w_z.transpose() * a_u + p.w_r.transpose() * a_r;
        dh_prev += d_zin.topRows(hid);
        dh = std::move(dh_prev);
    }
    return loss;
}

MatrixXd glorot(Index rows, Index cols, Index fan_in, Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    return m;
}

DenseLayer make_layer(Index in, Index out, Activation act, InitScheme scheme, Rng& rng) {
    DenseLayer layer;
    layer.weights = scheme == InitScheme::zeros ? MatrixXd::Zero(out, in) : glorot(out, in, in, out, rng);
    layer.biases = VectorXd::Zero(out);
    layer.activation = act;
    return layer;
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "identity") return Activation::identity;
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation: " + name);
}

std::string to_string(NeuralKind kind) {
    switch (kind) {
        case NeuralKind::mlp: return "mlp";
        case NeuralKind::lstm: return "lstm";
        case NeuralKind::gru: return "gru";
    }
    return "mlp";
}

NeuralKind kind_of(const NeuralModel& model) { return static_cast<NeuralKind>(model.index()); }

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& x) {
    if (model.layers.empty()) throw DimensionError("MLP has no layers");
    MatrixXd a = x;
    for (const auto& layer : model.layers) {
        if (a.rows() != layer.inputs()) {
            throw DimensionError("MLP layer expects " + std::to_string(layer.inputs()) +
                                 " inputs, got " + std::to_string(a.rows()));
        }
        a = dense_apply(layer, a);
        check_finite(a, "mlp_forward");
    }
    return a.col(0);
}

LstmState lstm_cell_step(const Eigen::VectorXd& x, const LstmState& state, const LstmParams& p) {
    if (x.size() != p.input_size || state.h.size() != p.hidden_size ||
        state.c.size() != p.hidden_size) {
        throw DimensionError("lstm_cell_step dimension mismatch");
    }
    VectorXd z(p.hidden_size + p.input_size);
    z << state.h, x;
    const VectorXd f = sigmoid(p.w_f * z + p.b_f);
    const VectorXd i = sigmoid(p.w_i * z + p.b_i);
    const VectorXd o = sigmoid(p.w_o * z + p.b_o);
    const VectorXd g = (p.w_c * z + p.b_c).array().tanh().matrix();
    LstmState next;
    next.c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
    next.h = o.cwiseProduct(next.c.array().tanh().matrix());
    return next;
}

Eigen::VectorXd gru_cell_step(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                              const GruParams& p) {
    if (x.size() != p.input_size || h_prev.size() != p.hidden_size) {
        throw DimensionError("gru_cell_step dimension mismatch");
    }
    VectorXd z(p.hidden_size + p.input_size);
    z << h_prev, x;
    const VectorXd r = sigmoid(p.w_r * z + p.b_r);
    const VectorXd u = sigmoid(p.w_z * z + p.b_z);
    VectorXd zc(p.hidden_size + p.input_size);
    zc << r.cwiseProduct(h_prev), x;
    const VectorXd cand = (p.w_h * zc + p.b_h).array().tanh().matrix();
    return (1.0 - u.array()).matrix().cwiseProduct(h_prev) + u.cwiseProduct(cand);
}

Eigen::VectorXd forward_sequence(const LstmParams& params, const Eigen::MatrixXd& window) {
    if (window.rows() == 0) throw DataError("forward_sequence needs a nonempty window");
    LstmState state{VectorXd::Zero(params.hidden_size), VectorXd::Zero(params.hidden_size)};
    for (Index s = 0; s < window.rows(); ++s) {
        state = lstm_cell_step(window.row(s).transpose(), state, params);
    }
    return dense_apply(params.head, state.h).col(0);
}

Eigen::VectorXd forward_sequence(const GruParams& params, const Eigen::MatrixXd& window) {
    if (window.rows() == 0) throw DataError("forward_sequence needs a nonempty window");
    VectorXd h = VectorXd::Zero(params.hidden_size);
    for (Index s = 0; s < window.rows(); ++s) h = gru_cell_step(window.row(s).transpose(), h, params);
    return dense_apply(params.head, h).col(0);
}

NeuralModel init_model(const NeuralArch& arch, InitScheme scheme, std::uint64_t seed) {
    if (arch.input_size < 1 || arch.output_size < 1) throw ConfigError("network sizes must be positive");
    Rng rng = Rng::stream(seed, "neural.init");
    const bool zero = scheme == InitScheme::zeros;
    switch (arch.kind) {
        case NeuralKind::mlp: {
            MlpModel m;
            Index in = arch.input_size;
            for (int width : arch.hidden_layers) {
                if (width < 1) throw ConfigError("hidden layer width must be positive");
                m.layers.push_back(make_layer(in, width, arch.hidden_activation, scheme, rng));
                in = width;
            }
            m.layers.push_back(make_layer(in, arch.output_size, Activation::identity, scheme, rng));
            return m;
        }
        case NeuralKind::lstm: {
            if (arch.hidden_size < 1) throw ConfigError("hidden_size must be positive");
            LstmParams p;
            const Index hid = arch.hidden_size, cat = arch.hidden_size + arch.input_size;
            p.hidden_size = arch.hidden_size;
            p.input_size = arch.input_size;
            for (auto* w : {&p.w_f, &p.w_i, &p.w_o, &p.w_c}) {
                *w = zero ? MatrixXd::Zero(hid, cat) : glorot(hid, cat, cat, hid, rng);
            }
            for (auto* b : {&p.b_f, &p.b_i, &p.b_o, &p.b_c}) *b = VectorXd::Zero(hid);
            if (arch.forget_bias_one && !zero) p.b_f.setOnes();
            p.head = make_layer(hid, arch.output_size, Activation::identity, scheme, rng);
            return p;
        }
        case NeuralKind::gru: {
            if (arch.hidden_size < 1) throw ConfigError("hidden_size must be positive");
            GruParams p;
            const Index hid = arch.hidden_size, cat = arch.hidden_size + arch.input_size;
            p.hidden_size = arch.hidden_size;
            p.input_size = arch.input_size;
            for (auto* w : {&p.w_r, &p.w_z, &p.w_h}) {
                *w = zero ? MatrixXd::Zero(hid, cat) : glorot(hid, cat, cat, hid, rng);
            }
            for (auto* b : {&p.b_r, &p.b_z, &p.b_h}) *b = VectorXd::Zero(hid);
            p.head = make_layer(hid, arch.output_size, Activation::identity, scheme, rng);
            return p;
        }
    }
    throw ConfigError("unknown network kind");
}

std::vector<double> flatten(const NeuralModel& model) {
    return std::visit([](const auto& m) { return flatten_model(m); }, model);
}

void unflatten(NeuralModel& model, std::span<const double> values) {
    std::visit(
        [&](auto& m) {
            std::size_t k = 0;
            visit_tensors(m, [&](auto& t) {
                for (Index r = 0; r < t.rows(); ++r)
                    for (Index c = 0; c < t.cols(); ++c) {
                        if (k >= values.size()) throw DimensionError("too few parameter values");
                        t(r, c) = values[k++];
                    }
            });
            if (k != values.size()) throw DimensionError("too many parameter values");
        },
        model);
}

std::size_t parameter_count(const NeuralModel& model) {
    return std::visit(
        [](const auto& m) {
            std::size_t n = 0;
            visit_tensors(const_cast<std::decay_t<decltype(m)>&>(m),
                          [&](auto& t) { n += static_cast<std::size_t>(t.size()); });
            return n;
        },
        model);
}

double batch_loss(const NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  std::span<const std::size_t> rows, std::vector<double>* grad) {
    if (x.rows() != y.rows()) throw DimensionError("inputs and targets differ in row count");
    if (rows.empty()) throw DataError("empty batch");
    return std::visit(
        [&](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            M g;
            M* gp = nullptr;
            if (grad) {
                g = zeros_like(m);
                gp = &g;
            }
            double loss = 0.0;
            if constexpr (std::is_same_v<M, MlpModel>) loss = mlp_batch(m, x, y, rows, gp);
            else if constexpr (std::is_same_v<M, LstmParams>) loss = lstm_batch(m, x, y, rows, gp);
            else loss = gru_batch(m, x, y, rows, gp);
            if (grad) *grad = flatten_model(g);
            return loss;
        },
        model);
}

Eigen::MatrixXd predict(const NeuralModel& model, const Eigen::MatrixXd& x) {
    MatrixXd out;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            Index outputs = 0;
            if constexpr (std::is_same_v<M, MlpModel>) {
                outputs = m.layers.back().outputs();
            } else {
                outputs = m.head.outputs();
            }
            out.resize(x.rows(), outputs);
            for (Index r = 0; r < x.rows(); ++r) {
                if constexpr (std::is_same_v<M, MlpModel>) {
                    out.row(r) = mlp_forward(m, x.row(r).transpose()).transpose();
                } else {
                    const Index steps = sequence_steps(x, m.input_size);
                    MatrixXd window(steps, m.input_size);
                    for (Index s = 0; s < steps; ++s) {
                        window.row(s) = x.row(r).segment(s * m.input_size, m.input_size);
                    }
                    out.row(r) = forward_sequence(m, window).transpose();
                }
            }
        },
        model);
    return out;
}

}  // namespace rivercast

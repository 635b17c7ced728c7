#include "doctest.h"

#include "rivercast/error.hpp"
#include "rivercast/neural.hpp"
#include "rivercast/rng.hpp"
#include "rivercast/train.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

using namespace rivercast;

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

DenseLayer dense(Eigen::Index out, Eigen::Index in, Activation a = Activation::identity) {
    return DenseLayer{Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out), a};
}

LstmParams zero_lstm(int hidden, int input, int outputs = 1) {
    LstmParams p;
    p.hidden_size = hidden;
    p.input_size = input;
    for (auto* w : {&p.w_f, &p.w_i, &p.w_o, &p.w_c}) *w = Eigen::MatrixXd::Zero(hidden, hidden + input);
    for (auto* b : {&p.b_f, &p.b_i, &p.b_o, &p.b_c}) *b = Eigen::VectorXd::Zero(hidden);
    p.head = dense(outputs, hidden);
    return p;
}

GruParams zero_gru(int hidden, int input, int outputs = 1) {
    GruParams p;
    p.hidden_size = hidden;
    p.input_size = input;
    for (auto* w : {&p.w_r, &p.w_z, &p.w_h}) *w = Eigen::MatrixXd::Zero(hidden, hidden + input);
    for (auto* b : {&p.b_r, &p.b_z, &p.b_h}) *b = Eigen::VectorXd::Zero(hidden);
    p.head = dense(outputs, hidden);
    return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) out(i++) = d;
    return out;
}

std::vector<std::size_t> all_rows(Eigen::Index n) {
    std::vector<std::size_t> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

/// Central differences of the library loss, written independently of its backward pass.
std::vector<double> numeric_gradient(const NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const auto rows = all_rows(x.rows());
    std::vector<double> theta = flatten(model), g(theta.size());
    NeuralModel probe = model;
    const double h = 1e-5;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double keep = theta[k];
        theta[k] = keep + h;
        unflatten(probe, theta);
        const double up = batch_loss(probe, x, y, rows, nullptr);
        theta[k] = keep - h;
        unflatten(probe, theta);
        const double down = batch_loss(probe, x, y, rows, nullptr);
        theta[k] = keep;
        g[k] = (up - down) / (2 * h);
    }
    return g;
}

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        worst = std::max(worst, std::fabs(a[k] - b[k]) / std::max({1.0, std::fabs(a[k]), std::fabs(b[k])}));
    }
    return worst;
}

double analytic_vs_numeric(const NeuralModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    std::vector<double> grad;
    batch_loss(model, x, y, all_rows(x.rows()), &grad);
    return max_relative_error(grad, numeric_gradient(model, x, y));
}

void randomize(NeuralModel& model, std::uint64_t seed, double scale) {
    Rng rng(seed);
    auto theta = flatten(model);
    for (auto& t : theta) t = scale * rng.normal();
    unflatten(model, theta);
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("mlp forward by hand") {
    MlpModel id;
    id.layers = {dense(3, 3), dense(3, 3)};
    for (auto& l : id.layers) l.weights.setIdentity();
    const Eigen::VectorXd x = vec({0.5, -2.0, 7.0});
    CHECK(mlp_forward(id, x) == x);

    MlpModel zero;
    zero.layers = {dense(4, 3, Activation::tanh), dense(2, 4)};
    zero.layers[1].biases = vec({1.5, -0.25});
    CHECK(mlp_forward(zero, x) == vec({1.5, -0.25}));

    MlpModel relu;
    relu.layers = {dense(1, 1, Activation::relu), dense(1, 1)};
    relu.layers[0].weights(0, 0) = 2.0;
    relu.layers[0].biases(0) = -1.0;
    relu.layers[1].weights(0, 0) = 3.0;
    CHECK(mlp_forward(relu, vec({1.0}))(0) == 3.0);
    CHECK(mlp_forward(relu, vec({0.25}))(0) == 0.0);

    CHECK_THROWS_AS(mlp_forward(relu, vec({1.0, 2.0})), DimensionError);
}

TEST_CASE("mlp flags non-finite activations") {
    MlpModel m;
    m.layers = {dense(1, 1), dense(1, 1)};
    m.layers[0].weights(0, 0) = 1e300;
    m.layers[1].weights(0, 0) = 1e300;
    CHECK_THROWS_AS(mlp_forward(m, vec({1e10})), DataError);
}

TEST_CASE("lstm cell by hand") {
    const auto p = zero_lstm(1, 1);
    const LstmState zero{vec({0.0}), vec({0.0})};
    const auto s0 = lstm_cell_step(vec({3.0}), zero, p);
    CHECK(s0.h(0) == 0.0);
    CHECK(s0.c(0) == 0.0);

    const auto s1 = lstm_cell_step(vec({3.0}), LstmState{vec({0.0}), vec({1.0})}, p);
    CHECK(s1.c(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s1.h(0) == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
    CHECK(s1.h(0) == doctest::Approx(0.231059).epsilon(1e-6));

    auto sat = zero_lstm(1, 1);
    sat.b_f(0) = 10.0;
    const auto s2 = lstm_cell_step(vec({0.7}), LstmState{vec({0.2}), vec({0.8})}, sat);
    CHECK(std::fabs(s2.c(0) - 0.8) < 1e-4);

    CHECK_THROWS_AS(lstm_cell_step(vec({1.0, 2.0}), zero, p), DimensionError);
}

TEST_CASE("gru cell by hand") {
    const auto p = zero_gru(1, 1);
    CHECK(gru_cell_step(vec({4.0}), vec({0.0}), p)(0) == 0.0);
    CHECK(gru_cell_step(vec({4.0}), vec({1.0}), p)(0) == doctest::Approx(0.5).epsilon(1e-15));

    auto sat = zero_gru(2, 1);
    sat.b_z.setConstant(-10.0);
    Rng rng(2);
    for (auto* w : {&sat.w_r, &sat.w_h}) {
        for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = rng.normal();
    }
    const Eigen::VectorXd h0 = vec({0.3, -0.6});
    CHECK((gru_cell_step(vec({1.0}), h0, sat) - h0).cwiseAbs().maxCoeff() < 1e-4);
    CHECK_THROWS_AS(gru_cell_step(vec({1.0}), vec({0.0}), sat), DimensionError);
}

TEST_CASE("sequence forward with zero parameters returns the head bias") {
    auto l = zero_lstm(3, 2, 2);
    l.head.biases = vec({0.75, -1.0});
    auto g = zero_gru(3, 2, 2);
    g.head.biases = vec({0.75, -1.0});
    Rng rng(6);
    Eigen::MatrixXd window(5, 2);
    for (Eigen::Index i = 0; i < window.size(); ++i) window.data()[i] = rng.normal();
    CHECK(forward_sequence(l, window) == l.head.biases);
    CHECK(forward_sequence(g, window) == g.head.biases);
    CHECK_THROWS_AS(forward_sequence(l, Eigen::MatrixXd(0, 2)), DataError);
}

TEST_CASE("one-step window equals a cell step plus the head") {
    NeuralArch arch;
    arch.kind = NeuralKind::lstm;
    arch.input_size = 2;
    arch.hidden_size = 3;
    auto model = init_model(arch, InitScheme::glorot_uniform, 4);
    randomize(model, 9, 0.5);
    const auto& p = std::get<LstmParams>(model);
    Eigen::MatrixXd window(1, 2);
    window << 0.4, -1.1;
    const auto s = lstm_cell_step(window.row(0).transpose(), LstmState{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)}, p);
    const Eigen::VectorXd expect = p.head.weights * s.h + p.head.biases;
    CHECK((forward_sequence(p, window) - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-step scalar lstm matches a hand chain") {
    auto p = zero_lstm(1, 1);
    // Gate rows are [w_h, w_x].
    p.w_f << 0.3, -0.2;
    p.w_i << -0.5, 0.4;
    p.w_o << 0.1, 0.9;
    p.w_c << 0.7, -0.6;
    p.b_f << 0.2;
    p.b_i << -0.1;
    p.b_o << 0.05;
    p.b_c << 0.3;
    p.head.weights << 1.7;
    p.head.biases << -0.4;
    const double xs[2] = {0.8, -1.3};
    double h = 0.0, c = 0.0;
    for (double x : xs) {
        const double f = sigmoid(0.3 * h - 0.2 * x + 0.2);
        const double i = sigmoid(-0.5 * h + 0.4 * x - 0.1);
        const double o = sigmoid(0.1 * h + 0.9 * x + 0.05);
        const double g = std::tanh(0.7 * h - 0.6 * x + 0.3);
        c = f * c + i * g;
        h = o * std::tanh(c);
    }
    Eigen::MatrixXd window(2, 1);
    window << 0.8, -1.3;
    CHECK(forward_sequence(p, window)(0) == doctest::Approx(1.7 * h - 0.4).epsilon(1e-14));
    const auto s1 = lstm_cell_step(vec({0.8}), LstmState{vec({0.0}), vec({0.0})}, p);
    const auto s2 = lstm_cell_step(vec({-1.3}), s1, p);
    CHECK(s2.h(0) == doctest::Approx(h).epsilon(1e-14));
    CHECK(s2.c(0) == doctest::Approx(c).epsilon(1e-14));
}

TEST_CASE("two-step scalar gru matches a hand chain") {
    auto p = zero_gru(1, 1);
    p.w_r << 0.6, -0.3;
    p.w_z << -0.4, 0.8;
    p.w_h << 1.1, 0.5;
    p.b_r << 0.1;
    p.b_z << -0.2;
    p.b_h << 0.05;
    p.head.weights << -0.9;
    p.head.biases << 0.3;
    double h = 0.0;
    for (double x : {0.5, 2.0}) {
        const double r = sigmoid(0.6 * h - 0.3 * x + 0.1);
        const double z = sigmoid(-0.4 * h + 0.8 * x - 0.2);
        const double cand = std::tanh(1.1 * r * h + 0.5 * x + 0.05);
        h = (1 - z) * h + z * cand;
    }
    Eigen::MatrixXd window(2, 1);
    window << 0.5, 2.0;
    CHECK(forward_sequence(p, window)(0) == doctest::Approx(-0.9 * h + 0.3).epsilon(1e-14));
}

TEST_CASE("lstm state bounds under random parameters") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = zero_lstm(4, 3);
        for (auto* w : {&p.w_f, &p.w_i, &p.w_o, &p.w_c}) {
            for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = 3.0 * rng.normal();
        }
        for (auto* b : {&p.b_f, &p.b_i, &p.b_o, &p.b_c}) {
            for (Eigen::Index i = 0; i < b->size(); ++i) (*b)(i) = 3.0 * rng.normal();
        }
        LstmState s{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
        for (int t = 0; t < 30; ++t) {
            Eigen::VectorXd x(3);
            for (Eigen::Index i = 0; i < 3; ++i) x(i) = 5.0 * rng.normal();
            const auto next = lstm_cell_step(x, s, p);
            CHECK(next.h.cwiseAbs().maxCoeff() < 1.0);
            for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::fabs(next.c(i)) <= std::fabs(s.c(i)) + 1.0);
            s = next;
        }
    }
}

TEST_CASE("gru step is a convex combination") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = zero_gru(3, 2);
        for (auto* w : {&p.w_r, &p.w_z, &p.w_h}) {
            for (Eigen::Index i = 0; i < w->size(); ++i) w->data()[i] = 2.0 * rng.normal();
        }
        Eigen::VectorXd h(3), x(2);
        for (Eigen::Index i = 0; i < 3; ++i) h(i) = std::tanh(rng.normal());
        for (Eigen::Index i = 0; i < 2; ++i) x(i) = rng.normal();
        // Candidate recomputed independently.
        Eigen::VectorXd hx(5);
        hx << h, x;
        const Eigen::VectorXd r = (p.w_r * hx + p.b_r).unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd rhx(5);
        rhx << r.cwiseProduct(h), x;
        const Eigen::VectorXd cand = (p.w_h * rhx + p.b_h).array().tanh();
        const Eigen::VectorXd out = gru_cell_step(x, h, p);
        for (Eigen::Index i = 0; i < 3; ++i) {
            CHECK(out(i) >= std::min(h(i), cand(i)) - 1e-15);
            CHECK(out(i) <= std::max(h(i), cand(i)) + 1e-15);
        }
    }
}

TEST_CASE("parameter layout and initialization") {
    NeuralArch mlp;
    mlp.input_size = 5;
    mlp.hidden_layers = {6, 4};
    mlp.output_size = 2;
    const auto m = init_model(mlp, InitScheme::glorot_uniform, 1);
    CHECK(parameter_count(m) == 5 * 6 + 6 + 6 * 4 + 4 + 4 * 2 + 2);
    const auto& layers = std::get<MlpModel>(m).layers;
    REQUIRE(layers.size() == 3);
    CHECK(layers.back().activation == Activation::identity);
    const double bound = std::sqrt(6.0 / (5 + 6));
    CHECK(layers[0].weights.cwiseAbs().maxCoeff() <= bound);
    CHECK(layers[0].biases.isZero());
    // Row-major weights then biases, layer by layer.
    const auto theta = flatten(m);
    CHECK(theta[1] == layers[0].weights(0, 1));
    CHECK(theta[5] == layers[0].weights(1, 0));
    CHECK(theta[30] == layers[0].biases(0));
    CHECK(theta[36] == layers[1].weights(0, 0));

    NeuralArch lstm;
    lstm.kind = NeuralKind::lstm;
    lstm.input_size = 3;
    lstm.hidden_size = 4;
    const auto l = init_model(lstm, InitScheme::glorot_uniform, 1);
    CHECK(parameter_count(l) == 4 * (4 * 7 + 4) + 4 + 1);
    CHECK(std::get<LstmParams>(l).b_f == Eigen::VectorXd::Ones(4));
    CHECK(std::get<LstmParams>(l).b_i.isZero());
    lstm.forget_bias_one = false;
    CHECK(std::get<LstmParams>(init_model(lstm, InitScheme::glorot_uniform, 1)).b_f.isZero());
    const auto zeros = init_model(lstm, InitScheme::zeros, 1);
    for (double v : flatten(zeros)) CHECK(v == 0.0);

    NeuralArch gru;
    gru.kind = NeuralKind::gru;
    gru.input_size = 3;
    gru.hidden_size = 4;
    gru.output_size = 5;
    CHECK(parameter_count(init_model(gru, InitScheme::glorot_uniform, 1)) == 3 * (4 * 7 + 4) + 4 * 5 + 5);

    for (const auto* arch : {&mlp, &lstm, &gru}) {
        auto a = init_model(*arch, InitScheme::glorot_uniform, 7);
        CHECK(flatten(a) == flatten(init_model(*arch, InitScheme::glorot_uniform, 7)));
        CHECK(flatten(a) != flatten(init_model(*arch, InitScheme::glorot_uniform, 8)));
        auto theta2 = flatten(a);
        for (auto& t : theta2) t += 1.0;
        unflatten(a, theta2);
        CHECK(flatten(a) == theta2);
        CHECK_THROWS_AS(unflatten(a, std::vector<double>(3)), DimensionError);
    }
}

TEST_CASE("batch loss is the mean squared error over rows and outputs") {
    for (auto kind : {NeuralKind::mlp, NeuralKind::lstm, NeuralKind::gru}) {
        const auto c = random_gradient_case(kind, 3);
        const Eigen::MatrixXd p = predict(c.model, c.x);
        const double expect = (p - c.y).squaredNorm() / static_cast<double>(c.y.size());
        CHECK(batch_loss(c.model, c.x, c.y, all_rows(c.x.rows()), nullptr) == doctest::Approx(expect).epsilon(1e-13));
        const std::vector<std::size_t> some{2, 0};
        const double sub = ((p.row(2) - c.y.row(2)).squaredNorm() + (p.row(0) - c.y.row(0)).squaredNorm()) /
                           static_cast<double>(2 * c.y.cols());
        CHECK(batch_loss(c.model, c.x, c.y, some, nullptr) == doctest::Approx(sub).epsilon(1e-13));
    }
}

TEST_CASE("linear mlp gradient is exact") {
    MlpModel m;
    m.layers = {dense(4, 3), dense(2, 4)};
    NeuralModel model = m;
    randomize(model, 31, 0.7);
    Rng rng(32);
    Eigen::MatrixXd x(6, 3), y(6, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
    CHECK(analytic_vs_numeric(model, x, y) < 1e-8);
    CHECK(gradient_check(model, x, y) < 1e-8);
}

TEST_CASE("gradients match finite differences on 20 seeds per architecture") {
    for (auto kind : {NeuralKind::mlp, NeuralKind::lstm, NeuralKind::gru}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto c = random_gradient_case(kind, seed);
            CHECK(parameter_count(c.model) <= 500);
            CHECK(analytic_vs_numeric(c.model, c.x, c.y) < 1e-4);
            CHECK(gradient_check(c.model, c.x, c.y) < 1e-4);
        }
    }
}

TEST_CASE("four-unit lstm over a six-step window") {
    const auto c = random_gradient_case(NeuralKind::lstm, 99, 6, 4);
    const auto& p = std::get<LstmParams>(c.model);
    CHECK(p.hidden_size == 4);
    CHECK(c.x.cols() == 6 * p.input_size);
    CHECK(analytic_vs_numeric(c.model, c.x, c.y) < 1e-4);
}

TEST_CASE("gradient vanishes at an exact fit") {
    for (auto kind : {NeuralKind::mlp, NeuralKind::lstm, NeuralKind::gru}) {
        auto c = random_gradient_case(kind, 5);
        c.y = predict(c.model, c.x);
        std::vector<double> grad;
        batch_loss(c.model, c.x, c.y, all_rows(c.x.rows()), &grad);
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        CHECK(std::sqrt(norm) < 1e-6);
    }
}

TEST_CASE("batched prediction equals sequence forward") {
    for (auto kind : {NeuralKind::lstm, NeuralKind::gru}) {
        const auto c = random_gradient_case(kind, 17, 5, 7);
        const Eigen::MatrixXd p = predict(c.model, c.x);
        const int in = kind == NeuralKind::lstm ? std::get<LstmParams>(c.model).input_size
                                                : std::get<GruParams>(c.model).input_size;
        for (Eigen::Index r = 0; r < c.x.rows(); ++r) {
            Eigen::MatrixXd window(5, in);
            for (int t = 0; t < 5; ++t) {
                for (int k = 0; k < in; ++k) window(t, k) = c.x(r, t * in + k);
            }
            const Eigen::VectorXd one = kind == NeuralKind::lstm ? forward_sequence(std::get<LstmParams>(c.model), window)
                                                                 : forward_sequence(std::get<GruParams>(c.model), window);
            CHECK((p.row(r).transpose() - one).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
}

TEST_CASE("zero epochs and zero learning rate leave parameters unchanged") {
    for (auto kind : {NeuralKind::mlp, NeuralKind::lstm, NeuralKind::gru}) {
        const auto c = random_gradient_case(kind, 8);
        NeuralArch arch;
        arch.kind = kind;
        arch.input_size = kind == NeuralKind::mlp ? static_cast<int>(c.x.cols()) : 3;
        arch.output_size = static_cast<int>(c.y.cols());
        arch.hidden_layers = {5};
        arch.hidden_size = 3;
        TrainConfig cfg;
        cfg.seed = 4;
        cfg.epochs = 0;
        const auto r0 = fit(arch, c.x, c.y, cfg);
        CHECK(r0.loss_history.empty());
        CHECK(flatten(r0.model) == flatten(init_model(arch, cfg.init_scheme, cfg.seed)));

        for (auto opt : {Optimizer::sgd, Optimizer::adam}) {
            cfg.epochs = 5;
            cfg.learning_rate = 0.0;
            cfg.optimizer = opt;
            cfg.batch_size = 2;
            NeuralModel model = c.model;
            const auto history = train(model, c.x, c.y, cfg);
            CHECK(history.size() == 5);
            CHECK(flatten(model) == flatten(c.model));
        }
    }
}

TEST_CASE("training is deterministic per seed") {
    for (auto kind : {NeuralKind::mlp, NeuralKind::lstm, NeuralKind::gru}) {
        const auto c = random_gradient_case(kind, 10, 4, 12);
        for (auto opt : {Optimizer::sgd, Optimizer::adam}) {
            NeuralModel a = c.model, b = c.model;
            TrainConfig cfg;
            cfg.optimizer = opt;
            cfg.learning_rate = 0.01;
            cfg.batch_size = 5;
            cfg.epochs = 15;
            cfg.seed = 3;
            std::vector<double> seen;
            const auto ha = train(a, c.x, c.y, cfg, [&](int epoch, double loss) {
                CHECK(epoch == static_cast<int>(seen.size()) + 1);
                seen.push_back(loss);
            });
            const auto hb = train(b, c.x, c.y, cfg);
            CHECK(ha == hb);
            CHECK(ha == seen);
            CHECK(flatten(a) == flatten(b));
            CHECK(flatten(a) != flatten(c.model));
        }
    }
}

TEST_CASE("ten-point sine is interpolated") {
    Eigen::MatrixXd x(10, 1), y(10, 1);
    for (int i = 0; i < 10; ++i) {
        x(i, 0) = -1.0 + 2.0 * i / 9.0;
        y(i, 0) = std::sin(std::numbers::pi * x(i, 0));
    }
    NeuralArch arch;
    arch.input_size = 1;
    arch.hidden_layers = {20};
    arch.hidden_activation = Activation::tanh;
    TrainConfig cfg;
    cfg.optimizer = Optimizer::adam;
    cfg.learning_rate = 0.01;
    cfg.batch_size = 10;
    cfg.epochs = 2000;
    cfg.seed = 1;
    const auto r = fit(arch, x, y, cfg);
    REQUIRE(r.loss_history.size() == 2000);
    const Eigen::MatrixXd p = predict(r.model, x);
    CHECK((p - y).squaredNorm() / 10.0 < 1e-3);
}

TEST_CASE("divergence is reported with its epoch") {
    Eigen::MatrixXd x(4, 1), y(4, 1);
    x << 1e3, -2e3, 3e3, 4e3;
    y << 1e3, 5e3, -2e3, 7e3;
    NeuralArch arch;
    arch.input_size = 1;
    arch.hidden_layers = {4};
    arch.hidden_activation = Activation::identity;
    TrainConfig cfg;
    cfg.optimizer = Optimizer::sgd;
    cfg.learning_rate = 10.0;
    cfg.gradient_clip_norm = 0.0;
    cfg.epochs = 200;
    cfg.batch_size = 4;
    try {
        fit(arch, x, y, cfg);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() >= 1);
        CHECK(e.epoch() <= 200);
    }
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.epochs = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.learning_rate = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(optimizer_from_string("sgd") == Optimizer::sgd);
    CHECK(to_string(Optimizer::adam) == "adam");
    CHECK_THROWS_AS(optimizer_from_string("rmsprop"), ConfigError);
    CHECK(activation_from_string(to_string(Activation::sigmoid)) == Activation::sigmoid);
}

}  // TEST_SUITE

#include <doctest.h>

#include "netdelay/error.hpp"
#include "netdelay/mlp.hpp"
#include "netdelay/rng.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace netdelay;

namespace {

double act(Activation a, double z) {
    switch (a) {
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Tanh: return std::tanh(z);
    case Activation::Rectified: return z > 0 ? z : 0.0;
    }
    return 0;
}

// Scalar-loop forward pass, written without Eigen expressions.
std::vector<double> reference_forward(const Mlp& mlp, std::vector<double> x) {
    const auto& layers = mlp.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& w = layers[l].weight;
        std::vector<double> y(static_cast<std::size_t>(w.rows()));
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            double z = layers[l].bias(i);
            for (Eigen::Index j = 0; j < w.cols(); ++j) z += w(i, j) * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = l + 1 < layers.size() ? act(mlp.activation(), z) : z;
        }
        x = std::move(y);
    }
    return x;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

// Largest relative gap between backprop and central differences over every
// weight and bias.
double gradient_check(const std::vector<std::size_t>& sizes, Activation a, std::uint64_t seed) {
    Mlp mlp = init_mlp(sizes, a, seed);
    Rng rng(seed + 100);
    for (auto& layer : mlp.layers()) layer.bias = random_matrix(layer.bias.size(), 1, rng, -0.5, 0.5);
    const Eigen::Index batch = 7;
    Matrix x = random_matrix(static_cast<Eigen::Index>(sizes.front()), batch, rng);
    Matrix y = random_matrix(static_cast<Eigen::Index>(sizes.back()), batch, rng);
    const double lambda = 1e-3, eps = 1e-5;

    Gradients grad;
    loss_and_gradient(mlp, x, y, lambda, grad);
    double worst = 0;
    auto compare = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + eps;
        const double up = loss(mlp, x, y, lambda);
        param = saved - eps;
        const double down = loss(mlp, x, y, lambda);
        param = saved;
        const double numeric = (up - down) / (2 * eps);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    };
    for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
        auto& layer = mlp.layers()[l];
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) compare(layer.weight.data()[i], grad[l].weight.data()[i]);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) compare(layer.bias.data()[i], grad[l].bias.data()[i]);
    }
    return worst;
}

} // namespace

TEST_CASE("initialization") {
    auto a = init_mlp({25, 25, 25}, Activation::Sigmoid, 3);
    auto b = init_mlp({25, 25, 25}, Activation::Sigmoid, 3);
    for (std::size_t l = 0; l < a.layers().size(); ++l) {
        CHECK(a.layers()[l].weight == b.layers()[l].weight);
        CHECK(a.layers()[l].bias.isZero(0));
        const double bound = std::sqrt(6.0 / (25 + 25));
        CHECK(a.layers()[l].weight.cwiseAbs().maxCoeff() <= bound);
        CHECK(a.layers()[l].weight.cwiseAbs().maxCoeff() > 0.8 * bound);
    }
    auto c = init_mlp({25, 25, 25}, Activation::Sigmoid, 4);
    CHECK(c.layers()[0].weight != a.layers()[0].weight);
    CHECK(a.parameter_count() == 2 * (25 * 25 + 25));
    CHECK_THROWS_AS(Mlp({4, 4}, Activation::Tanh), Error);
}

TEST_CASE("forward pass") {
    Mlp zero({3, 5, 2}, Activation::Sigmoid);
    auto out = zero.forward(std::vector<double>{0.3, -1, 2});
    CHECK(out == std::vector<double>{0, 0});

    Mlp unit({1, 1, 1}, Activation::Sigmoid);
    unit.layers()[0].weight(0, 0) = 1;
    unit.layers()[1].weight(0, 0) = 1;
    CHECK(unit.forward(std::vector<double>{0.0})[0] == doctest::Approx(0.5));

    Rng rng(5);
    for (Activation a : {Activation::Sigmoid, Activation::Tanh, Activation::Rectified}) {
        auto mlp = init_mlp({6, 9, 7, 4}, a, 11);
        for (auto& layer : mlp.layers()) layer.bias = random_matrix(layer.bias.size(), 1, rng);
        Matrix x = random_matrix(6, 5, rng);
        Matrix batch = mlp.forward(x);
        for (Eigen::Index c = 0; c < 5; ++c) {
            std::vector<double> col(x.col(c).data(), x.col(c).data() + 6);
            auto ref = reference_forward(mlp, col);
            for (Eigen::Index i = 0; i < 4; ++i)
                CHECK(batch(i, c) == doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("loss definition") {
    Mlp zero({2, 3, 1}, Activation::Tanh);
    Matrix x = Matrix::Ones(2, 4);
    Matrix y = Matrix::Zero(1, 4);
    CHECK(loss(zero, x, y, 0.5) == 0.0);

    // Perfect predictions with sum of squared weights 2.
    Mlp w = zero;
    w.layers()[0].weight(0, 0) = 1;
    w.layers()[0].weight(1, 1) = 1; // hidden units feed nothing: output weights are zero
    CHECK(w.weight_norm_sq() == 2.0);
    CHECK(loss(w, x, y, 0.00003) == doctest::Approx(6e-5));

    Mlp off = zero;
    off.layers()[1].bias(0) = 0.1;
    CHECK(loss(off, x, y, 0.0) == doctest::Approx(0.01));
    off.layers()[1].bias(0) = 0.0;

    CHECK_THROWS_AS(loss(zero, Matrix::Ones(3, 4), y, 0), Error);
}

TEST_CASE("gradients match finite differences") {
    for (Activation a : {Activation::Sigmoid, Activation::Tanh, Activation::Rectified}) {
        CAPTURE(to_string(a));
        CHECK(gradient_check({4, 8, 4}, a, 1) < 1e-4);
        CHECK(gradient_check({4, 8, 8, 4}, a, 2) < 1e-4);
    }
}

TEST_CASE("adam") {
    Mlp mlp({2, 3, 2}, Activation::Sigmoid);
    auto before = mlp.layers();
    AdamState st(mlp);
    Gradients zero;
    for (const auto& l : mlp.layers()) zero.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    for (int i = 0; i < 100; ++i) adam_step(mlp, zero, st, 0.01);
    for (std::size_t l = 0; l < before.size(); ++l) {
        CHECK(mlp.layers()[l].weight == before[l].weight);
        CHECK(mlp.layers()[l].bias == before[l].bias);
    }

    // First step moves every parameter by ~lr against the gradient sign.
    Gradients g = zero;
    g[0].weight(0, 0) = 3.0;
    g[0].weight(1, 1) = -1e-3;
    g[1].bias(1) = 250.0;
    AdamState fresh(mlp);
    adam_step(mlp, g, fresh, 0.01);
    CHECK(mlp.layers()[0].weight(0, 0) - before[0].weight(0, 0) == doctest::Approx(-0.01).epsilon(1e-4));
    CHECK(mlp.layers()[0].weight(1, 1) - before[0].weight(1, 1) == doctest::Approx(0.01).epsilon(1e-4));
    CHECK(mlp.layers()[1].bias(1) - before[1].bias(1) == doctest::Approx(-0.01).epsilon(1e-4));
    CHECK(mlp.layers()[0].weight(0, 1) == before[0].weight(0, 1));

    // f(w) = w^2 from w = 1.
    Mlp bowl({1, 1, 1}, Activation::Sigmoid);
    bowl.layers()[0].weight(0, 0) = 1.0;
    AdamState bs(bowl);
    Gradients bg;
    bg.assign(bowl.layers().size(), DenseLayer{Matrix::Zero(1, 1), Vector::Zero(1)});
    for (int i = 0; i < 10000; ++i) {
        bg[0].weight(0, 0) = 2.0 * bowl.layers()[0].weight(0, 0);
        adam_step(bowl, bg, bs, 0.01);
    }
    CHECK(std::abs(bowl.layers()[0].weight(0, 0)) < 1e-3);
    CHECK(bs.step == 10000);
}

TEST_CASE("model file round trip") {
    auto mlp = init_mlp({9, 12, 12, 9}, Activation::Tanh, 8);
    Rng rng(6);
    for (auto& layer : mlp.layers()) layer.bias = random_matrix(layer.bias.size(), 1, rng);
    Scaler scaler{1234.5678901234, 0.1 / 3.0};

    auto dir = testutil::temp_dir("mlp");
    save_model(mlp, scaler, dir / "m.txt");
    Mlp back;
    Scaler back_scaler;
    load_model(dir / "m.txt", back, back_scaler);
    CHECK(back_scaler == scaler);
    CHECK(back.layer_sizes() == mlp.layer_sizes());
    CHECK(back.activation() == Activation::Tanh);

    Matrix x = random_matrix(9, 100, rng, 0, 2);
    CHECK(back.forward(x) == mlp.forward(x));

    auto text = format_model(mlp, scaler);
    Mlp tmp;
    Scaler tmp_scaler;
    try {
        parse_model(text.substr(0, text.size() / 2), tmp, tmp_scaler);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parse);
    }
    CHECK_THROWS_AS(parse_model("something else\n", tmp, tmp_scaler), Error);

    CHECK(parse_activation("relu") == Activation::Rectified);
    CHECK(parse_activation("rectified") == Activation::Rectified);
    CHECK_THROWS_AS(parse_activation("softplus"), Error);
}

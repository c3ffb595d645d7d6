#include <doctest.h>

#include "netdelay/error.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/trainer.hpp"

#include <cmath>

using namespace netdelay;

namespace {

// Smooth synthetic target on a 3-node layout: delay grows with the traffic
// of the pair and its row.
Dataset synthetic(std::size_t samples, std::uint64_t seed) {
    const std::size_t n = 3;
    Dataset ds;
    ds.meta.nodes = n;
    Rng rng(seed);
    std::uniform_real_distribution<double> u(10.0, 1000.0);
    for (std::size_t k = 0; k < samples; ++k) {
        Sample s;
        s.traffic.assign(n * n, 0.0);
        s.delay.assign(n * n, 0.0);
        for (std::size_t p = 0; p < n * n; ++p)
            if (p / n != p % n) s.traffic[p] = u(rng);
        for (std::size_t p = 0; p < n * n; ++p) {
            if (p / n == p % n) continue;
            double row = 0;
            for (std::size_t j = 0; j < n; ++j) row += s.traffic[(p / n) * n + j];
            s.delay[p] = 0.1 + 1e-4 * s.traffic[p] + 2e-5 * row;
        }
        ds.samples.push_back(s);
    }
    return ds;
}

SplitDataset manual_split(std::size_t train, std::size_t val, std::size_t test, std::uint64_t seed) {
    auto all = synthetic(train + val + test, seed);
    SplitDataset s;
    s.train.meta = s.validation.meta = s.test.meta = all.meta;
    for (std::size_t k = 0; k < all.size(); ++k)
        (k < train ? s.train : k < train + val ? s.validation : s.test).samples.push_back(all.samples[k]);
    return s;
}

} // namespace

TEST_CASE("scaler uses the training split only") {
    auto s = manual_split(10, 5, 5, 1);
    s.validation.samples[0].traffic[1] = 1e9;
    Scaler sc = fit_scaler(s.train);
    double max_in = 0, max_out = 0;
    for (const auto& smp : s.train.samples)
        for (std::size_t p = 0; p < 9; ++p) {
            max_in = std::max(max_in, smp.traffic[p]);
            max_out = std::max(max_out, smp.delay[p]);
        }
    CHECK(sc.input_scale == max_in);
    CHECK(sc.output_scale == max_out);
    Matrix x = input_matrix(s.train, sc);
    CHECK(x.maxCoeff() == doctest::Approx(1.0));
    CHECK(x.rows() == 9);
    CHECK(x.cols() == 10);
}

TEST_CASE("memorizes a tiny training set") {
    auto s = manual_split(10, 3, 3, 2);
    TrainConfig cfg;
    cfg.l2_lambda = 0.0;
    cfg.max_epochs = 50000;
    cfg.early_stop_patience = 0;
    cfg.eval_interval = 5000;
    cfg.seed = 3;
    auto model = train(init_mlp({9, 30, 9}, Activation::Sigmoid, 4), s, cfg);
    Matrix x = input_matrix(s.train, model.scaler);
    Matrix y = target_matrix(s.train, model.scaler);
    double train_mse = (model.mlp.forward(x) - y).squaredNorm() / static_cast<double>(y.size());
    CHECK(train_mse < 1e-6);
}

TEST_CASE("checkpoint selection, early stopping and determinism") {
    auto s = manual_split(60, 20, 20, 5);
    TrainConfig cfg;
    cfg.max_epochs = 3000;
    cfg.eval_interval = 50;
    cfg.early_stop_patience = 0;
    cfg.batch_size = 16;
    cfg.seed = 9;
    auto initial = init_mlp({9, 20, 9}, Activation::Tanh, 1);
    auto a = train(initial, s, cfg);
    auto b = train(initial, s, cfg);

    REQUIRE(a.history.entries.size() == 60);
    std::vector<double> val;
    for (const auto& h : a.history.entries) val.push_back(h.validation_mse);
    CHECK(a.history.best_validation_mse == *std::min_element(val.begin(), val.end()));
    CHECK(a.history.best_epoch == a.history.entries[best_index(val)].epoch);

    // The returned network is the checkpoint, not the last iterate.
    Matrix xv = input_matrix(s.validation, a.scaler);
    Matrix yv = target_matrix(s.validation, a.scaler);
    CHECK((a.mlp.forward(xv) - yv).squaredNorm() / static_cast<double>(yv.size()) ==
          doctest::Approx(a.history.best_validation_mse).epsilon(1e-12));

    REQUIRE(b.history.entries.size() == a.history.entries.size());
    for (std::size_t i = 0; i < a.history.entries.size(); ++i) {
        CHECK(a.history.entries[i].train_loss == b.history.entries[i].train_loss);
        CHECK(a.history.entries[i].validation_mse == b.history.entries[i].validation_mse);
    }

    cfg.seed = 10;
    auto c = train(initial, s, cfg);
    CHECK(c.history.entries.back().train_loss != a.history.entries.back().train_loss);

    // Patience counts evaluations without improvement.
    TrainConfig es = cfg;
    es.max_epochs = 200000;
    es.early_stop_patience = 3;
    es.eval_interval = 10;
    es.learning_rate = 0.05;
    auto stopped = train(initial, s, es);
    CHECK(stopped.history.entries.back().epoch < es.max_epochs);
    CHECK(stopped.history.entries.back().epoch == stopped.history.best_epoch + 3 * es.eval_interval);

    CHECK(best_index(std::vector<double>{3, 1, 2, 1}) == 1);
}

TEST_CASE("training argument checks") {
    auto s = manual_split(10, 3, 3, 2);
    TrainConfig cfg;
    cfg.max_epochs = 10;
    CHECK_THROWS_AS(train(init_mlp({4, 5, 4}, Activation::Sigmoid, 1), s, cfg), Error);
    cfg.learning_rate = 0;
    CHECK_THROWS_AS(train(init_mlp({9, 5, 9}, Activation::Sigmoid, 1), s, cfg), Error);

    TrainConfig wild;
    wild.learning_rate = 1e300;
    wild.max_epochs = 50;
    wild.eval_interval = 1;
    try {
        train(init_mlp({9, 5, 9}, Activation::Rectified, 1), s, wild);
        FAIL("expected divergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Diverged);
    }
}

TEST_CASE("evaluation arithmetic") {
    // N = 2, one sample, every prediction 0.1 above the measurement.
    Dataset test;
    test.meta.nodes = 2;
    test.samples.push_back({{0, 100, 200, 0}, {0, 0.3, 0.5, 0}});
    Mlp mlp({4, 2, 4}, Activation::Sigmoid);
    for (int p = 0; p < 4; ++p) mlp.layers()[1].bias(p) = test.samples[0].delay[static_cast<std::size_t>(p)] + 0.1;
    Scaler unit{1.0, 1.0};
    auto ev = evaluate(mlp, unit, test, 0.0);
    CHECK(ev.raw_mse == doctest::Approx(0.01));
    CHECK(ev.learning_error == doctest::Approx(0.01));
    CHECK(ev.mean_delay == doctest::Approx(0.4));
    CHECK(ev.relative_error == doctest::Approx(0.1 / 0.4));
    CHECK(evaluate(mlp, unit, test, 0.004).learning_error == doctest::Approx(0.006));

    // Output scaling is undone before comparison.
    Mlp half = mlp;
    half.layers()[1].bias /= 2.0;
    CHECK(evaluate(half, Scaler{1.0, 2.0}, test, 0.0).raw_mse == doctest::Approx(0.01));

    Mlp perfect = mlp;
    for (int p = 0; p < 4; ++p) perfect.layers()[1].bias(p) -= 0.1;
    auto clamp = evaluate(perfect, unit, test, 0.002);
    CHECK(clamp.raw_mse == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(clamp.learning_error == 0.0);
    CHECK(clamp.relative_error == 0.0);

    CHECK_THROWS_AS(evaluate(mlp, unit, Dataset{test.meta, {}}, 0.0), Error);
    CHECK_THROWS_AS(evaluate(mlp, unit, test, -1.0), Error);
}

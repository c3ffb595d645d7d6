#include "netdelay/trainer.hpp"

#include "netdelay/error.hpp"
#include "netdelay/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netdelay {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "learning_rate must be positive");
    if (!(l2_lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "l2_lambda must be >= 0");
    if (max_epochs < 1 || batch_size < 1 || eval_interval < 1)
        fail(ErrorCode::InvalidArgument, "max_epochs, batch_size and eval_interval must be >= 1");
}

Scaler fit_scaler(const Dataset& train) {
    Scaler s{0.0, 0.0};
    for (const Sample& smp : train.samples) {
        for (double v : smp.traffic) s.input_scale = std::max(s.input_scale, v);
        for (double v : smp.delay) s.output_scale = std::max(s.output_scale, v);
    }
    if (!(s.input_scale > 0.0)) s.input_scale = 1.0;
    if (!(s.output_scale > 0.0)) s.output_scale = 1.0;
    return s;
}

namespace {

Matrix gather(const Dataset& ds, bool traffic, double scale) {
    const auto nn = static_cast<Eigen::Index>(ds.meta.nodes * ds.meta.nodes);
    Matrix m(nn, static_cast<Eigen::Index>(ds.size()));
    for (std::size_t k = 0; k < ds.size(); ++k) {
        const auto& v = traffic ? ds.samples[k].traffic : ds.samples[k].delay;
        if (static_cast<Eigen::Index>(v.size()) != nn) fail(ErrorCode::DimensionMismatch, "sample size mismatch");
        for (Eigen::Index p = 0; p < nn; ++p) m(p, static_cast<Eigen::Index>(k)) = v[static_cast<std::size_t>(p)] / scale;
    }
    return m;
}

double mse(const Mlp& mlp, const Matrix& x, const Matrix& y) {
    return (mlp.forward(x) - y).squaredNorm() / static_cast<double>(y.size());
}

} // namespace

Matrix input_matrix(const Dataset& ds, const Scaler& scaler) { return gather(ds, true, scaler.input_scale); }
Matrix target_matrix(const Dataset& ds, const Scaler& scaler) { return gather(ds, false, scaler.output_scale); }

std::size_t best_index(std::span<const double> validation_mse) {
    if (validation_mse.empty()) fail(ErrorCode::InvalidArgument, "empty history");
    return static_cast<std::size_t>(std::min_element(validation_mse.begin(), validation_mse.end()) -
                                    validation_mse.begin());
}

TrainedModel train(const Mlp& initial, const SplitDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.train.size() == 0 || data.validation.size() == 0)
        fail(ErrorCode::InvalidArgument, "training and validation splits must be nonempty");

    TrainedModel result;
    result.scaler = fit_scaler(data.train);
    const Matrix x_train = input_matrix(data.train, result.scaler);
    const Matrix y_train = target_matrix(data.train, result.scaler);
    const Matrix x_val = input_matrix(data.validation, result.scaler);
    const Matrix y_val = target_matrix(data.validation, result.scaler);
    if (static_cast<std::size_t>(x_train.rows()) != initial.input_size() ||
        static_cast<std::size_t>(y_train.rows()) != initial.output_size())
        fail(ErrorCode::DimensionMismatch, "network shape does not match the dataset");

    Mlp mlp = initial;
    result.mlp = initial;
    AdamState adam(mlp);
    Gradients grad;
    Rng shuffle_rng(derive_seed(cfg.seed, {stream::shuffle}));

    const auto count = static_cast<std::size_t>(x_train.cols());
    const std::size_t batch = std::min(cfg.batch_size, count);
    std::vector<Eigen::Index> order(count);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Matrix xb, yb;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < count; start += batch) {
            const std::size_t len = std::min(batch, count - start);
            xb.resize(x_train.rows(), static_cast<Eigen::Index>(len));
            yb.resize(y_train.rows(), static_cast<Eigen::Index>(len));
            for (std::size_t i = 0; i < len; ++i) {
                xb.col(static_cast<Eigen::Index>(i)) = x_train.col(order[start + i]);
                yb.col(static_cast<Eigen::Index>(i)) = y_train.col(order[start + i]);
            }
            const double l = loss_and_gradient(mlp, xb, yb, cfg.l2_lambda, grad);
            if (!std::isfinite(l))
                fail(ErrorCode::Diverged, "training diverged at epoch " + std::to_string(epoch) +
                                              " (non-finite loss; try a smaller learning rate)");
            adam_step(mlp, grad, adam, cfg.learning_rate);
        }

        if (epoch % cfg.eval_interval != 0 && epoch != cfg.max_epochs) continue;
        HistoryEntry h;
        h.epoch = epoch;
        h.train_loss = mse(mlp, x_train, y_train) + cfg.l2_lambda * mlp.weight_norm_sq();
        h.validation_mse = mse(mlp, x_val, y_val);
        if (!std::isfinite(h.train_loss) || !std::isfinite(h.validation_mse))
            fail(ErrorCode::Diverged, "training diverged at epoch " + std::to_string(epoch));
        result.history.entries.push_back(h);
        if (h.validation_mse < best) {
            best = h.validation_mse;
            result.mlp = mlp;
            result.history.best_epoch = epoch;
            result.history.best_validation_mse = best;
            since_best = 0;
        } else if (cfg.early_stop_patience > 0 && ++since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    return result;
}

Evaluation evaluate(const Mlp& mlp, const Scaler& scaler, const Dataset& test, double nu) {
    if (test.size() == 0) fail(ErrorCode::InvalidArgument, "test set is empty");
    if (!(nu >= 0.0)) fail(ErrorCode::InvalidArgument, "nu must be >= 0");
    const Matrix x = input_matrix(test, scaler);
    const Matrix predicted = mlp.forward(x) * scaler.output_scale;
    const Matrix measured = target_matrix(test, Scaler{1.0, 1.0});
    Evaluation ev;
    ev.samples = test.size();
    ev.nu = nu;
    ev.raw_mse = (predicted - measured).squaredNorm() / static_cast<double>(measured.size());
    ev.learning_error = std::max(ev.raw_mse - nu, 0.0);
    ev.mean_delay = test.mean_delay();
    ev.relative_error = ev.mean_delay > 0.0 ? std::sqrt(ev.learning_error) / ev.mean_delay : 0.0;
    return ev;
}

} // namespace netdelay

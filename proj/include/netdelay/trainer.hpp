#pragma once

#include "netdelay/dataset.hpp"
#include "netdelay/mlp.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace netdelay {

struct TrainConfig {
    double learning_rate = 0.001;
    double l2_lambda = 0.00003;
    std::size_t max_epochs = 200'000;
    std::size_t batch_size = 512;
    /// Evaluations without a new best validation MSE before stopping; 0 disables.
    std::size_t early_stop_patience = 200;
    std::size_t eval_interval = 100;
    std::uint64_t seed = 1;

    void validate() const;
};

struct HistoryEntry {
    std::size_t epoch = 0;
    double train_loss = 0.0;     // full training-set loss incl. L2, scaled units
    double validation_mse = 0.0; // scaled units
};

struct TrainHistory {
    std::vector<HistoryEntry> entries;
    std::size_t best_epoch = 0;
    double best_validation_mse = 0.0;
};

struct TrainedModel {
    Mlp mlp;
    Scaler scaler;
    TrainHistory history;
};

/// Input divisor: the largest training rate; output divisor: the largest
/// training delay.
Scaler fit_scaler(const Dataset& train);
Matrix input_matrix(const Dataset& ds, const Scaler& scaler);
Matrix target_matrix(const Dataset& ds, const Scaler& scaler);

/// Index of the first minimum, the checkpoint selection rule.
std::size_t best_index(std::span<const double> validation_mse);

/// Mini-batch Adam on the training split with a fixed shuffling schedule
/// derived from cfg.seed; returns the checkpoint with the lowest validation
/// MSE. Throws ErrorCode::Diverged on a non-finite loss.
TrainedModel train(const Mlp& initial, const SplitDataset& data, const TrainConfig& cfg);

struct Evaluation {
    double raw_mse = 0.0;        // tu^2, mean over samples and all N*N positions
    double nu = 0.0;             // subtracted measurement variance
    double learning_error = 0.0; // max(raw_mse - nu, 0)
    double relative_error = 0.0; // sqrt(learning_error) / mean off-diagonal test delay
    double mean_delay = 0.0;
    std::size_t samples = 0;
};

Evaluation evaluate(const Mlp& mlp, const Scaler& scaler, const Dataset& test, double nu);

} // namespace netdelay

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace netdelay {

enum class Activation { Sigmoid, Tanh, Rectified };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// Samples are columns: an input batch is (input_size x batch).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DenseLayer {
    Matrix weight; // fan_out x fan_in
    Vector bias;   // fan_out
};

/// Fully connected network with one activation kind on every hidden layer
/// and a linear output layer.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<std::size_t> layer_sizes, Activation hidden);

    const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    std::size_t hidden_layers() const { return sizes_.size() - 2; }
    Activation activation() const noexcept { return activation_; }

    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::size_t parameter_count() const;
    /// Sum of squared weights (biases excluded).
    double weight_norm_sq() const;

    Matrix forward(const Matrix& inputs) const;
    std::vector<double> forward(std::span<const double> input) const;

private:
    std::vector<std::size_t> sizes_;
    Activation activation_ = Activation::Sigmoid;
    std::vector<DenseLayer> layers_;
};

/// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, Activation hidden, std::uint64_t seed);

using Gradients = std::vector<DenseLayer>;

/// Mean over batch and output coordinates of the squared error, plus
/// l2_lambda times the sum of squared weights.
double loss(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, double l2_lambda);

/// Same value as loss(); also fills `grad` by backpropagation.
double loss_and_gradient(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, double l2_lambda,
                         Gradients& grad);

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    Gradients first;
    Gradients second;
    std::uint64_t step = 0;

    explicit AdamState(const Mlp& mlp);
};

void adam_step(Mlp& mlp, const Gradients& grad, AdamState& state, double learning_rate);

/// Divisors mapping traffic and delay into the network's working range.
struct Scaler {
    double input_scale = 1.0;
    double output_scale = 1.0;

    bool operator==(const Scaler&) const = default;
};

std::string format_model(const Mlp& mlp, const Scaler& scaler);
void parse_model(const std::string& text, Mlp& mlp, Scaler& scaler);
void save_model(const Mlp& mlp, const Scaler& scaler, const std::filesystem::path& path);
void load_model(const std::filesystem::path& path, Mlp& mlp, Scaler& scaler);

} // namespace netdelay

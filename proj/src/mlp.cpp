#include "netdelay/mlp.hpp"

#include "netdelay/error.hpp"
#include "netdelay/rng.hpp"
#include "netdelay/text.hpp"

#include <cmath>
#include <sstream>

namespace netdelay {

namespace {

void activate(Activation a, Matrix& z) {
    switch (a) {
    case Activation::Sigmoid: z = (1.0 + (-z.array()).exp()).inverse().matrix(); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
    case Activation::Rectified: z = z.array().max(0.0).matrix(); break;
    }
}

/// Multiplies `delta` in place by the activation derivative, expressed
/// through the activation output.
void scale_by_derivative(Activation a, const Matrix& out, Matrix& delta) {
    switch (a) {
    case Activation::Sigmoid: delta.array() *= out.array() * (1.0 - out.array()); break;
    case Activation::Tanh: delta.array() *= 1.0 - out.array().square(); break;
    case Activation::Rectified: delta.array() *= (out.array() > 0.0).cast<double>(); break;
    }
}

void check_batch(const Mlp& mlp, const Matrix& inputs, const Matrix& targets) {
    if (static_cast<std::size_t>(inputs.rows()) != mlp.input_size() ||
        static_cast<std::size_t>(targets.rows()) != mlp.output_size() || inputs.cols() != targets.cols())
        fail(ErrorCode::DimensionMismatch, "batch shape does not match the network");
    if (inputs.cols() == 0) fail(ErrorCode::InvalidArgument, "empty batch");
}

} // namespace

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Rectified: return "rectified";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    if (name == "rectified" || name == "relu") return Activation::Rectified;
    fail(ErrorCode::InvalidArgument, "unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden)
    : sizes_(std::move(layer_sizes)), activation_(hidden) {
    if (sizes_.size() < 3) fail(ErrorCode::InvalidArgument, "network needs at least one hidden layer");
    for (std::size_t s : sizes_)
        if (s < 1) fail(ErrorCode::InvalidArgument, "layer sizes must be >= 1");
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
        const auto out = static_cast<Eigen::Index>(sizes_[l]);
        const auto in = static_cast<Eigen::Index>(sizes_[l - 1]);
        layers_.push_back({Matrix::Zero(out, in), Vector::Zero(out)});
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t total = 0;
    for (const auto& l : layers_) total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return total;
}

double Mlp::weight_norm_sq() const {
    double s = 0.0;
    for (const auto& l : layers_) s += l.weight.squaredNorm();
    return s;
}

Matrix Mlp::forward(const Matrix& inputs) const {
    if (static_cast<std::size_t>(inputs.rows()) != input_size())
        fail(ErrorCode::DimensionMismatch, "input has " + std::to_string(inputs.rows()) + " features, network expects " +
                                               std::to_string(input_size()));
    Matrix a = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Matrix z = layers_[l].weight * a;
        z.colwise() += layers_[l].bias;
        if (l + 1 < layers_.size()) activate(activation_, z);
        a = std::move(z);
    }
    return a;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    Matrix x = Eigen::Map<const Matrix>(input.data(), static_cast<Eigen::Index>(input.size()), 1);
    Matrix y = forward(x);
    return {y.data(), y.data() + y.size()};
}

Mlp init_mlp(const std::vector<std::size_t>& layer_sizes, Activation hidden, std::uint64_t seed) {
    Mlp mlp(layer_sizes, hidden);
    Rng rng(derive_seed(seed, {stream::init}));
    for (auto& layer : mlp.layers()) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
        layer.bias.setZero();
    }
    return mlp;
}

double loss(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, double l2_lambda) {
    check_batch(mlp, inputs, targets);
    const double mse = (mlp.forward(inputs) - targets).squaredNorm() / static_cast<double>(targets.size());
    return mse + l2_lambda * mlp.weight_norm_sq();
}

double loss_and_gradient(const Mlp& mlp, const Matrix& inputs, const Matrix& targets, double l2_lambda,
                         Gradients& grad) {
    check_batch(mlp, inputs, targets);
    const auto& layers = mlp.layers();
    const std::size_t depth = layers.size();

    std::vector<Matrix> acts;
    acts.reserve(depth + 1);
    acts.push_back(inputs);
    for (std::size_t l = 0; l < depth; ++l) {
        Matrix z = layers[l].weight * acts.back();
        z.colwise() += layers[l].bias;
        if (l + 1 < depth) activate(mlp.activation(), z);
        acts.push_back(std::move(z));
    }

    Matrix delta = acts.back() - targets;
    const double mse = delta.squaredNorm() / static_cast<double>(targets.size());
    delta *= 2.0 / static_cast<double>(targets.size());

    grad.resize(depth);
    for (std::size_t l = depth; l-- > 0;) {
        if (l + 1 < depth) scale_by_derivative(mlp.activation(), acts[l + 1], delta);
        grad[l].weight.noalias() = delta * acts[l].transpose();
        grad[l].weight += 2.0 * l2_lambda * layers[l].weight;
        grad[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Matrix prev = layers[l].weight.transpose() * delta;
            delta = std::move(prev);
        }
    }
    return mse + l2_lambda * mlp.weight_norm_sq();
}

AdamState::AdamState(const Mlp& mlp) {
    for (const auto& l : mlp.layers()) {
        first.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
        second.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
}

void adam_step(Mlp& mlp, const Gradients& grad, AdamState& state, double learning_rate) {
    auto& layers = mlp.layers();
    if (grad.size() != layers.size() || state.first.size() != layers.size())
        fail(ErrorCode::DimensionMismatch, "gradient / optimizer state does not match the network");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(AdamState::beta1, t);
    const double c2 = 1.0 - std::pow(AdamState::beta2, t);
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = AdamState::beta1 * m + (1.0 - AdamState::beta1) * g;
        v = AdamState::beta2 * v + (1.0 - AdamState::beta2) * g.cwiseProduct(g);
        param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + AdamState::epsilon);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
        update(layers[l].weight, grad[l].weight, state.first[l].weight, state.second[l].weight);
        update(layers[l].bias, grad[l].bias, state.first[l].bias, state.second[l].bias);
    }
}

namespace {

constexpr std::string_view kModelMagic = "netdelay-mlp";
constexpr int kModelVersion = 1;

} // namespace

std::string format_model(const Mlp& mlp, const Scaler& scaler) {
    std::string out;
    out += std::string(kModelMagic) + " " + std::to_string(kModelVersion) + "\n";
    out += "activation " + std::string(to_string(mlp.activation())) + "\n";
    out += "sizes";
    for (std::size_t s : mlp.layer_sizes()) out += " " + std::to_string(s);
    out += "\n";
    out += "input_scale " + format_double(scaler.input_scale) + "\n";
    out += "output_scale " + format_double(scaler.output_scale) + "\n";
    for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
        const auto& layer = mlp.layers()[l];
        out += "layer " + std::to_string(l) + "\n";
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            out += "w";
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) out += " " + format_double(layer.weight(r, c));
            out += "\n";
        }
        out += "b";
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) out += " " + format_double(layer.bias(r));
        out += "\n";
    }
    out += "end\n";
    return out;
}

void parse_model(const std::string& text, Mlp& mlp, Scaler& scaler) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto next = [&](std::string_view expect) {
        if (!std::getline(in, line))
            fail(ErrorCode::Parse, "model file truncated: expected '" + std::string(expect) + "' at line " +
                                       std::to_string(line_no + 1));
        ++line_no;
        auto tokens = split_whitespace(line);
        if (tokens.empty() || tokens[0] != expect)
            fail(ErrorCode::Parse, "model line " + std::to_string(line_no) + ": expected '" + std::string(expect) + "'");
        return tokens;
    };
    auto ctx = [&] { return "model line " + std::to_string(line_no) + ": "; };
    // A short row at end of input is a cut-off file, not a shape problem.
    auto bad_row = [&](const char* what) {
        if (in.peek() == std::char_traits<char>::eof())
            fail(ErrorCode::Parse, "model file truncated at line " + std::to_string(line_no));
        fail(ErrorCode::DimensionMismatch, ctx() + what);
    };

    auto header = next(kModelMagic);
    if (header.size() != 2 || parse_number<int>(header[1], ctx()) != kModelVersion)
        fail(ErrorCode::Parse, "unsupported model format version");
    auto act = next("activation");
    if (act.size() != 2) fail(ErrorCode::Parse, ctx() + "expected 'activation <name>'");
    Activation activation = parse_activation(act[1]);
    auto sizes_tok = next("sizes");
    std::vector<std::size_t> sizes;
    for (std::size_t i = 1; i < sizes_tok.size(); ++i) sizes.push_back(parse_number<std::size_t>(sizes_tok[i], ctx()));
    auto in_scale = next("input_scale");
    auto out_scale = next("output_scale");
    if (in_scale.size() != 2 || out_scale.size() != 2) fail(ErrorCode::Parse, ctx() + "malformed scaler line");
    Scaler sc{parse_number<double>(in_scale[1], ctx()), parse_number<double>(out_scale[1], ctx())};
    if (!(sc.input_scale > 0.0) || !(sc.output_scale > 0.0)) fail(ErrorCode::Parse, "scaler values must be positive");

    Mlp result(sizes, activation);
    for (std::size_t l = 0; l < result.layers().size(); ++l) {
        auto tag = next("layer");
        if (tag.size() != 2 || parse_number<std::size_t>(tag[1], ctx()) != l)
            fail(ErrorCode::Parse, ctx() + "layer index mismatch");
        auto& layer = result.layers()[l];
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            auto w = next("w");
            if (static_cast<Eigen::Index>(w.size()) != layer.weight.cols() + 1)
                bad_row("weight row has the wrong length");
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = parse_number<double>(w[static_cast<std::size_t>(c) + 1], ctx());
        }
        auto b = next("b");
        if (static_cast<Eigen::Index>(b.size()) != layer.bias.size() + 1)
            bad_row("bias row has the wrong length");
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            layer.bias(r) = parse_number<double>(b[static_cast<std::size_t>(r) + 1], ctx());
    }
    next("end");
    mlp = std::move(result);
    scaler = sc;
}

void save_model(const Mlp& mlp, const Scaler& scaler, const std::filesystem::path& path) {
    write_file(path, format_model(mlp, scaler));
}

void load_model(const std::filesystem::path& path, Mlp& mlp, Scaler& scaler) {
    parse_model(read_file(path), mlp, scaler);
}

} // namespace netdelay

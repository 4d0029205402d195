#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace synrl {

// Row-major everywhere: one sample per row, one neuron per weight row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ActivationKind { Tanh, Relu, Identity };
enum class LossKind { MeanSquaredEuclidean, SoftmaxCrossEntropy };

std::string_view to_string(ActivationKind kind);
std::string_view to_string(LossKind kind);
ActivationKind parse_activation(std::string_view name);
LossKind parse_loss(std::string_view name);

struct LayerSpec {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    ActivationKind activation = ActivationKind::Identity;

    bool operator==(const LayerSpec&) const = default;
};

// Convenience: {2, 16, 1} with `hidden` on every inner layer and `output` on the last.
std::vector<LayerSpec> chain_layers(const std::vector<std::size_t>& widths,
                                    ActivationKind hidden, ActivationKind output);

struct Dataset {
    Matrix X;  // N x d, not bias-augmented
    Matrix Y;  // N x c, one-hot rows or a single +-1 column

    std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(X.cols()); }
    std::size_t output_dim() const { return static_cast<std::size_t>(Y.cols()); }

    // Copies the listed rows, in order.
    Dataset subset(const std::vector<std::size_t>& rows) const;
};

// Throws ValidationError unless X/Y row counts agree, N >= 1 and every entry is finite.
void validate_dataset(const Dataset& data);

/// Dense feedforward network. Layer k has an output_dim x (input_dim + 1) weight
/// matrix whose column 0 multiplies the constant bias input. Every entry of every
/// matrix is one synapse; canonical synapse order is layer, then row, then column.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<LayerSpec> layers, LossKind loss);  // zero weights

    const std::vector<LayerSpec>& layers() const { return layers_; }
    LossKind loss_kind() const { return loss_; }
    std::size_t input_dim() const { return layers_.front().input_dim; }
    std::size_t output_dim() const { return layers_.back().output_dim; }

    std::size_t layer_count() const { return layers_.size(); }
    const Matrix& weights(std::size_t layer) const { return weights_[layer]; }
    Matrix& weights(std::size_t layer) { return weights_[layer]; }

    std::size_t synapse_count() const;

    // Flat canonical-order access; index in [0, synapse_count()).
    double synapse(std::size_t index) const;
    double& synapse(std::size_t index);

    // Index of the first layer holding a non-finite weight, or layer_count() if none.
    std::size_t first_nonfinite_layer() const;

    bool operator==(const Mlp& other) const;

private:
    std::vector<LayerSpec> layers_;
    std::vector<Matrix> weights_;
    LossKind loss_ = LossKind::MeanSquaredEuclidean;
};

// Forward pass; returns N x output_dim. Hidden outputs are activated and get a
// bias 1 prepended; the final layer applies its own activation only.
Matrix forward(const Mlp& net, const Matrix& X);
// Same computation without the shape/finiteness checks; for hot loops whose
// inputs were validated once up front.
Matrix forward_unchecked(const Mlp& net, const Matrix& X);

// Mean over samples. Softmax for cross-entropy is fused here with max subtraction.
double loss(const Mlp& net, const Dataset& data);
double loss_from_outputs(LossKind kind, const Matrix& outputs, const Matrix& targets);

// Single output column: positive class iff output > 0, label class iff label > 0.
// Multiple columns: argmax of output row vs argmax of label row.
double accuracy(const Mlp& net, const Dataset& data);
double accuracy_from_outputs(const Matrix& outputs, const Matrix& targets);

struct InitScheme {
    enum class Kind { Zero, Uniform } kind = Kind::Zero;
    double lo = 0.0;
    double hi = 0.0;

    static InitScheme zero() { return {}; }
    static InitScheme uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
};

// Fills synapses in canonical order from one seeded stream.
Mlp init_weights(const std::vector<LayerSpec>& layers, LossKind loss, const InitScheme& scheme,
                 std::uint64_t seed);

// Versioned JSON; weights use shortest round-trip decimals, so reload is exact.
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(std::string_view text);

inline constexpr int kMlpFormatVersion = 1;

}  // namespace synrl

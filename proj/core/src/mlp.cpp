#include "synrl/mlp.hpp"

#include "synrl/errors.hpp"
#include "synrl/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace synrl {

namespace {

std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
    std::ostringstream os;
    os << rows << "x" << cols;
    return os.str();
}

void activate_inplace(ActivationKind kind, Matrix& m) {
    switch (kind) {
    case ActivationKind::Tanh: m = m.array().tanh().matrix(); break;
    case ActivationKind::Relu: m = m.cwiseMax(0.0); break;
    case ActivationKind::Identity: break;
    }
}

// One affine layer: a * W[:,1:]^T + bias row.
Matrix affine(const Matrix& a, const Matrix& w) {
    const Eigen::Index in = w.cols() - 1;
    Matrix z = a * w.rightCols(in).transpose();
    z.rowwise() += w.col(0).transpose();
    return z;
}

void require_all_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw ValidationError(std::string(what) + " contains non-finite values");
}

Eigen::Index argmax_row(const Matrix& m, Eigen::Index row) {
    Eigen::Index best = 0;
    m.row(row).maxCoeff(&best);
    return best;
}

}  // namespace

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Identity: return "identity";
    }
    return "?";
}

std::string_view to_string(LossKind kind) {
    switch (kind) {
    case LossKind::MeanSquaredEuclidean: return "mse";
    case LossKind::SoftmaxCrossEntropy: return "softmax_xent";
    }
    return "?";
}

ActivationKind parse_activation(std::string_view name) {
    if (name == "tanh") return ActivationKind::Tanh;
    if (name == "relu") return ActivationKind::Relu;
    if (name == "identity") return ActivationKind::Identity;
    throw ValidationError("unknown activation '" + std::string(name) + "'");
}

LossKind parse_loss(std::string_view name) {
    if (name == "mse") return LossKind::MeanSquaredEuclidean;
    if (name == "softmax_xent") return LossKind::SoftmaxCrossEntropy;
    throw ValidationError("unknown loss '" + std::string(name) + "'");
}

std::vector<LayerSpec> chain_layers(const std::vector<std::size_t>& widths, ActivationKind hidden,
                                    ActivationKind output) {
    if (widths.size() < 2) throw ValidationError("a network needs at least input and output widths");
    std::vector<LayerSpec> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const bool last = k + 2 == widths.size();
        layers.push_back({widths[k], widths[k + 1], last ? output : hidden});
    }
    return layers;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.Y.resize(static_cast<Eigen::Index>(rows.size()), Y.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
        out.Y.row(static_cast<Eigen::Index>(i)) = Y.row(r);
    }
    return out;
}

void validate_dataset(const Dataset& data) {
    if (data.X.rows() == 0) throw ValidationError("dataset is empty");
    if (data.X.rows() != data.Y.rows())
        throw ValidationError("dataset X has " + std::to_string(data.X.rows()) + " rows but Y has " +
                              std::to_string(data.Y.rows()));
    require_all_finite(data.X, "dataset X");
    require_all_finite(data.Y, "dataset Y");
}

Mlp::Mlp(std::vector<LayerSpec> layers, LossKind loss) : layers_(std::move(layers)), loss_(loss) {
    if (layers_.empty()) throw ValidationError("network has no layers");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
        const auto& l = layers_[k];
        if (l.input_dim == 0 || l.output_dim == 0)
            throw ValidationError("layer " + std::to_string(k) + " has a zero dimension");
        if (k + 1 < layers_.size() && l.output_dim != layers_[k + 1].input_dim)
            throw ValidationError("layer " + std::to_string(k) + " output_dim " + std::to_string(l.output_dim) +
                                  " does not match layer " + std::to_string(k + 1) + " input_dim " +
                                  std::to_string(layers_[k + 1].input_dim));
        weights_.push_back(Matrix::Zero(static_cast<Eigen::Index>(l.output_dim),
                                        static_cast<Eigen::Index>(l.input_dim + 1)));
    }
}

std::size_t Mlp::synapse_count() const {
    std::size_t n = 0;
    for (const auto& w : weights_) n += static_cast<std::size_t>(w.size());
    return n;
}

double Mlp::synapse(std::size_t index) const { return const_cast<Mlp*>(this)->synapse(index); }

double& Mlp::synapse(std::size_t index) {
    for (auto& w : weights_) {
        const auto n = static_cast<std::size_t>(w.size());
        if (index < n) return w.data()[index];
        index -= n;
    }
    throw std::out_of_range("synapse index out of range");
}

std::size_t Mlp::first_nonfinite_layer() const {
    for (std::size_t k = 0; k < weights_.size(); ++k)
        if (!weights_[k].allFinite()) return k;
    return weights_.size();
}

bool Mlp::operator==(const Mlp& other) const {
    if (layers_ != other.layers_ || loss_ != other.loss_) return false;
    for (std::size_t k = 0; k < weights_.size(); ++k)
        if (weights_[k] != other.weights_[k]) return false;
    return true;
}

Matrix forward(const Mlp& net, const Matrix& X) {
    if (static_cast<std::size_t>(X.cols()) != net.input_dim())
        throw ValidationError("input has shape " + shape_str(X.rows(), X.cols()) + " but the network expects " +
                              std::to_string(net.input_dim()) + " columns");
    require_all_finite(X, "input");
    return forward_unchecked(net, X);
}

Matrix forward_unchecked(const Mlp& net, const Matrix& X) {
    Matrix a = X;
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        a = affine(a, net.weights(k));
        activate_inplace(net.layers()[k].activation, a);
    }
    return a;
}

double loss_from_outputs(LossKind kind, const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() == 0) throw ValidationError("loss of an empty dataset is undefined");
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw ValidationError("outputs " + shape_str(outputs.rows(), outputs.cols()) + " vs targets " +
                              shape_str(targets.rows(), targets.cols()));
    const auto n = static_cast<double>(outputs.rows());
    if (kind == LossKind::MeanSquaredEuclidean) return (outputs - targets).squaredNorm() / n;

    double total = 0.0;
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        const double m = outputs.row(i).maxCoeff();
        const double log_sum = m + std::log((outputs.row(i).array() - m).exp().sum());
        // Targets may be soft; one-hot reduces to -log softmax[true].
        total += (targets.row(i).array() * (log_sum - outputs.row(i).array())).sum();
    }
    return total / n;
}

double loss(const Mlp& net, const Dataset& data) {
    validate_dataset(data);
    return loss_from_outputs(net.loss_kind(), forward(net, data.X), data.Y);
}

double accuracy_from_outputs(const Matrix& outputs, const Matrix& targets) {
    if (outputs.rows() == 0) throw ValidationError("accuracy of an empty dataset is undefined");
    if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols())
        throw ValidationError("outputs " + shape_str(outputs.rows(), outputs.cols()) + " vs targets " +
                              shape_str(targets.rows(), targets.cols()));
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < outputs.rows(); ++i) {
        if (outputs.cols() == 1)
            hits += (outputs(i, 0) > 0.0) == (targets(i, 0) > 0.0);
        else
            hits += argmax_row(outputs, i) == argmax_row(targets, i);
    }
    return static_cast<double>(hits) / static_cast<double>(outputs.rows());
}

double accuracy(const Mlp& net, const Dataset& data) {
    validate_dataset(data);
    return accuracy_from_outputs(forward(net, data.X), data.Y);
}

Mlp init_weights(const std::vector<LayerSpec>& layers, LossKind loss, const InitScheme& scheme,
                 std::uint64_t seed) {
    Mlp net(layers, loss);
    if (scheme.kind == InitScheme::Kind::Zero) return net;
    if (!(scheme.lo < scheme.hi)) throw ValidationError("uniform init requires lo < hi");
    Rng rng(seed);
    const std::size_t n = net.synapse_count();
    for (std::size_t i = 0; i < n; ++i) net.synapse(i) = rng.uniform(scheme.lo, scheme.hi);
    return net;
}

std::string mlp_to_json(const Mlp& net) {
    nlohmann::ordered_json j;
    j["format_version"] = kMlpFormatVersion;
    j["loss"] = to_string(net.loss_kind());
    auto& layers = j["layers"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const auto& spec = net.layers()[k];
        const auto& w = net.weights(k);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
            rows.push_back(std::move(row));
        }
        layers.push_back({{"input_dim", spec.input_dim},
                          {"output_dim", spec.output_dim},
                          {"activation", to_string(spec.activation)},
                          {"weights", std::move(rows)}});
    }
    return j.dump(1);
}

Mlp mlp_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.at("format_version").get<int>() != kMlpFormatVersion)
            throw ValidationError("unsupported network format_version " + j.at("format_version").dump());
        std::vector<LayerSpec> specs;
        for (const auto& l : j.at("layers"))
            specs.push_back({l.at("input_dim").get<std::size_t>(), l.at("output_dim").get<std::size_t>(),
                             parse_activation(l.at("activation").get<std::string>())});
        Mlp net(specs, parse_loss(j.at("loss").get<std::string>()));
        for (std::size_t k = 0; k < specs.size(); ++k) {
            const auto& rows = j.at("layers")[k].at("weights");
            auto& w = net.weights(k);
            if (rows.size() != static_cast<std::size_t>(w.rows()))
                throw ValidationError("layer " + std::to_string(k) + " weight row count mismatch");
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                const auto& row = rows[static_cast<std::size_t>(r)];
                if (row.size() != static_cast<std::size_t>(w.cols()))
                    throw ValidationError("layer " + std::to_string(k) + " weight column count mismatch");
                for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            }
        }
        if (net.first_nonfinite_layer() != net.layer_count()) throw ValidationError("network has non-finite weights");
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed network JSON: ") + e.what());
    }
}

}  // namespace synrl

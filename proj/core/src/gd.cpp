#include "synrl/gd.hpp"

#include "synrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace synrl {

namespace {

Matrix activate(ActivationKind kind, const Matrix& z) {
    switch (kind) {
    case ActivationKind::Tanh: return z.array().tanh().matrix();
    case ActivationKind::Relu: return z.cwiseMax(0.0);
    case ActivationKind::Identity: return z;
    }
    return z;
}

// d activation / d z, expressed through the pre-activation z and output a.
Matrix activation_derivative(ActivationKind kind, const Matrix& z, const Matrix& a) {
    switch (kind) {
    case ActivationKind::Tanh: return (1.0 - a.array().square()).matrix();
    case ActivationKind::Relu: return (z.array() > 0.0).cast<double>().matrix();
    case ActivationKind::Identity: return Matrix::Ones(z.rows(), z.cols());
    }
    return Matrix::Ones(z.rows(), z.cols());
}

Matrix softmax_rows(const Matrix& z) {
    Matrix p(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double m = z.row(i).maxCoeff();
        p.row(i) = (z.row(i).array() - m).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

void check_shapes(const Mlp& net, const Dataset& data) {
    validate_dataset(data);
    if (data.input_dim() != net.input_dim() || data.output_dim() != net.output_dim())
        throw ValidationError("dataset is " + std::to_string(data.input_dim()) + "->" +
                              std::to_string(data.output_dim()) + " but the network is " +
                              std::to_string(net.input_dim()) + "->" + std::to_string(net.output_dim()));
}

}  // namespace

std::vector<Matrix> backprop_gradients(const Mlp& net, const Dataset& data) {
    check_shapes(net, data);
    const std::size_t L = net.layer_count();
    const auto n = static_cast<double>(data.size());

    // inputs[k] is the unaugmented input to layer k; pre[k]/post[k] its pre/post activation.
    std::vector<Matrix> inputs(L), pre(L), post(L);
    Matrix a = data.X;
    for (std::size_t k = 0; k < L; ++k) {
        const auto& w = net.weights(k);
        inputs[k] = a;
        pre[k] = a * w.rightCols(w.cols() - 1).transpose();
        pre[k].rowwise() += w.col(0).transpose();
        post[k] = activate(net.layers()[k].activation, pre[k]);
        a = post[k];
    }

    // delta = dLoss/d pre[L-1]
    Matrix delta;
    const auto& out_layer = net.layers().back();
    if (net.loss_kind() == LossKind::SoftmaxCrossEntropy) {
        // Softmax is applied on the layer output; chain through the output activation.
        const Matrix d_out = (softmax_rows(post[L - 1]) - data.Y) / n;
        delta = d_out.cwiseProduct(activation_derivative(out_layer.activation, pre[L - 1], post[L - 1]));
    } else {
        const Matrix d_out = 2.0 * (post[L - 1] - data.Y) / n;
        delta = d_out.cwiseProduct(activation_derivative(out_layer.activation, pre[L - 1], post[L - 1]));
    }

    std::vector<Matrix> grads(L);
    for (std::size_t k = L; k-- > 0;) {
        const auto& w = net.weights(k);
        grads[k].resize(w.rows(), w.cols());
        grads[k].col(0) = delta.colwise().sum().transpose();
        grads[k].rightCols(w.cols() - 1) = delta.transpose() * inputs[k];
        if (k > 0) {
            const Matrix d_prev = delta * w.rightCols(w.cols() - 1);
            delta = d_prev.cwiseProduct(
                activation_derivative(net.layers()[k - 1].activation, pre[k - 1], post[k - 1]));
        }
    }
    return grads;
}

std::vector<Matrix> finite_difference_gradients(const Mlp& net, const Dataset& data, double h) {
    check_shapes(net, data);
    Mlp probe = net;
    std::vector<Matrix> grads;
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        Matrix g(net.weights(k).rows(), net.weights(k).cols());
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            double& w = probe.weights(k).data()[i];
            const double saved = w;
            w = saved + h;
            const double up = loss(probe, data);
            w = saved - h;
            const double down = loss(probe, data);
            w = saved;
            g.data()[i] = (up - down) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

double max_relative_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b, double floor) {
    if (a.size() != b.size()) throw ValidationError("gradient layer counts differ");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].rows() != b[k].rows() || a[k].cols() != b[k].cols())
            throw ValidationError("gradient shapes differ at layer " + std::to_string(k));
        for (Eigen::Index i = 0; i < a[k].size(); ++i) {
            const double x = a[k].data()[i], y = b[k].data()[i];
            const double scale = std::max({std::abs(x), std::abs(y), floor});
            worst = std::max(worst, std::abs(x - y) / scale);
        }
    }
    return worst;
}

GdResult train_gd(Mlp net, const Dataset& data, const Dataset* validation, const GdConfig& cfg,
                  std::ostream* csv_stream) {
    check_shapes(net, data);
    if (validation) check_shapes(net, *validation);
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
        throw ValidationError("gd config: learning_rate must be finite and >= 0");
    if (cfg.epochs == 0) throw ValidationError("gd config: epochs must be positive");
    if (cfg.metrics_every == 0) throw ValidationError("gd config: metrics_every must be positive");

    MetricsLog log;
    if (csv_stream) *csv_stream << MetricsLog::csv_header() << '\n';

    auto emit = [&](std::size_t epoch, double train_loss, const Matrix& out, std::optional<double> vloss,
                    std::optional<double> vacc) {
        MetricsRow row{.iteration = epoch, .train_loss = train_loss, .alpha_s = cfg.learning_rate};
        row.train_acc = accuracy_from_outputs(out, data.Y);
        row.val_loss = vloss;
        row.val_acc = vacc;
        if (csv_stream) *csv_stream << MetricsLog::csv_row(row) << '\n';
        log.append(std::move(row));
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    std::size_t epoch = 0;
    for (;; ++epoch) {
        const Matrix out = forward_unchecked(net, data.X);
        const double train_loss = loss_from_outputs(net.loss_kind(), out, data.Y);
        if (!std::isfinite(train_loss)) {
            const std::size_t layer = std::min(net.first_nonfinite_layer(), net.layer_count() - 1);
            throw DivergenceError(epoch, layer, "gradient descent diverged at epoch " + std::to_string(epoch));
        }
        std::optional<double> vloss, vacc;
        if (validation) {
            const Matrix vout = forward_unchecked(net, validation->X);
            vloss = loss_from_outputs(net.loss_kind(), vout, validation->Y);
            vacc = accuracy_from_outputs(vout, validation->Y);
        }

        bool stop = epoch == cfg.epochs;
        if (vloss && cfg.plateau_patience > 0) {
            if (*vloss < best_val - cfg.plateau_min_delta) {
                best_val = *vloss;
                since_best = 0;
            } else if (++since_best >= cfg.plateau_patience) {
                stop = true;
            }
        }
        if (epoch % cfg.metrics_every == 0 || stop) emit(epoch, train_loss, out, vloss, vacc);
        if (stop) break;

        const auto grads = backprop_gradients(net, data);
        for (std::size_t k = 0; k < net.layer_count(); ++k) net.weights(k) -= cfg.learning_rate * grads[k];
    }
    return {std::move(net), std::move(log), epoch};
}

}  // namespace synrl

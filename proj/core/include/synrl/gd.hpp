#pragma once

#include "synrl/metrics.hpp"
#include "synrl/mlp.hpp"

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

namespace synrl {

struct GdConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 1000;  // hard cap
    std::size_t metrics_every = 10;
    std::uint64_t seed = 0;
    // Plateau stop on validation loss: halt once the best validation loss has not
    // improved by at least `plateau_min_delta` for `plateau_patience` epochs.
    // 0 disables the plateau check.
    std::size_t plateau_patience = 50;
    double plateau_min_delta = 1e-4;
};

// Gradient of the mean loss with respect to every weight, one matrix per layer.
// Relu uses subgradient 0 at 0; cross-entropy fuses the softmax.
std::vector<Matrix> backprop_gradients(const Mlp& net, const Dataset& data);

// Central differences, one weight at a time. Independent of backprop; used as its oracle.
std::vector<Matrix> finite_difference_gradients(const Mlp& net, const Dataset& data, double h = 1e-5);

// Largest |a - b| / max(|a|, |b|, floor) over all weights.
double max_relative_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b, double floor = 1e-8);

struct GdResult {
    Mlp net;
    MetricsLog log;
    std::size_t epochs_run = 0;
};

// Full-batch gradient descent, w <- w - lr * grad, logging on the trainer's CSV schema.
GdResult train_gd(Mlp net, const Dataset& data, const Dataset* validation, const GdConfig& cfg,
                  std::ostream* csv_stream = nullptr);

}  // namespace synrl

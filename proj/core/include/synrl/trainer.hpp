#pragma once

#include "synrl/metrics.hpp"
#include "synrl/mlp.hpp"
#include "synrl/policy.hpp"
#include "synrl/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace synrl {

struct MinibatchConfig {
    std::size_t size = 0;
    std::size_t reselect_every = 0;
};

struct AlphaStep {
    std::size_t at_iteration = 0;
    double new_alpha_s = 0.0;
};

struct TrainerConfig {
    std::size_t iterations = 10000;
    double epsilon = 0.25;
    double alpha_s = 0.001;
    double alpha_q = 0.01;
    double gamma = 0.9;
    bool train_policy = true;
    std::optional<MinibatchConfig> minibatch;
    std::vector<AlphaStep> alpha_s_schedule;  // strictly increasing at_iteration
    std::uint64_t seed = 0;
    std::size_t metrics_every = 100;
    // Accuracy/validation cadence; 0 means "same as metrics_every".
    std::size_t eval_every = 0;
    TdForm td_form = TdForm::Standard;
    // 1 = reproducibility mode (sequential canonical order, one RNG stream).
    // >1 = performance mode: action selection split over threads with per-chunk streams.
    std::size_t threads = 1;
};

// Throws ValidationError on any violated constraint; `train_size` bounds the minibatch.
void validate_config(const TrainerConfig& cfg, std::size_t train_size);

// Step size in effect at `iteration`: the last schedule entry with at_iteration <= iteration.
double alpha_s_at(const TrainerConfig& cfg, std::size_t iteration);

// Uniform sample of `size` row indices without replacement (partial Fisher-Yates).
std::vector<std::size_t> reselect_minibatch(std::size_t n, std::size_t size, Rng& rng);

struct TrainResult {
    QTable policy;
    Mlp net;
    MetricsLog log;
};

/// Runs the synaptic RL loop for exactly cfg.iterations iterations.
///
/// Each iteration every synapse picks an epsilon-greedy action from its own
/// history, the network loss is recomputed on the current batch, and the single
/// reward sign is pushed into every history. With train_policy the shared table
/// is updated once per synapse with (pre-state, action, reward, post-state); the
/// first iteration is skipped because its pre-state is the synthetic initial
/// history. With train_policy false the returned policy equals `policy` bitwise.
///
/// After a minibatch re-selection the reference loss is recomputed on the new
/// batch; the following row is flagged as a batch boundary.
///
/// Throws DivergenceError if the loss goes non-finite.
TrainResult train(Mlp net, const QTable& policy, const Dataset& data, const Dataset* validation,
                  const TrainerConfig& cfg, std::ostream* csv_stream = nullptr);

}  // namespace synrl

#include "synrl/trainer.hpp"

#include "synrl/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <thread>

namespace synrl {

namespace {

constexpr std::uint64_t kActionStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kChunkStreamBase = 1000;

std::size_t diverged_layer(const Mlp& net, const Matrix& X) {
    if (const auto k = net.first_nonfinite_layer(); k != net.layer_count()) return k;
    Matrix a = X;
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const auto& w = net.weights(k);
        Matrix z = a * w.rightCols(w.cols() - 1).transpose();
        z.rowwise() += w.col(0).transpose();
        if (net.layers()[k].activation == ActivationKind::Tanh) z = z.array().tanh().matrix();
        if (net.layers()[k].activation == ActivationKind::Relu) z = z.cwiseMax(0.0);
        if (!z.allFinite()) return k;
        a = std::move(z);
    }
    return net.layer_count() - 1;
}

class SynapseField {
public:
    explicit SynapseField(Mlp& net) {
        for (std::size_t k = 0; k < net.layer_count(); ++k) {
            auto& w = net.weights(k);
            for (Eigen::Index i = 0; i < w.size(); ++i) weights_.push_back(w.data() + i);
        }
        history_.resize(weights_.size());
        state_.resize(weights_.size());
        action_.resize(weights_.size());
    }

    std::size_t size() const { return weights_.size(); }

    void act(std::size_t begin, std::size_t end, const QTable& q, double epsilon, double alpha_s, Rng& rng) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t s = encode_state(history_[i]);
            const ActionSign a = select_action(q, s, epsilon, rng);
            state_[i] = static_cast<std::uint8_t>(s);
            action_[i] = a;
            *weights_[i] = apply_action(*weights_[i], a, alpha_s);
        }
    }

    void observe(RewardSign reward) {
        for (std::size_t i = 0; i < size(); ++i) history_[i].push(action_[i], reward);
    }

    void learn(QTable& q, RewardSign reward, TdForm form) const {
        for (std::size_t i = 0; i < size(); ++i) q.td_update(state_[i], action_[i], reward, encode_state(history_[i]), form);
    }

private:
    std::vector<double*> weights_;
    std::vector<SynapseHistory> history_;
    std::vector<std::uint8_t> state_;  // pre-action state of the current iteration
    std::vector<ActionSign> action_;
};

}  // namespace

void validate_config(const TrainerConfig& cfg, std::size_t train_size) {
    auto fail = [](const std::string& msg) { throw ValidationError("trainer config: " + msg); };
    if (cfg.iterations == 0) fail("iterations must be positive");
    if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) fail("epsilon must lie in [0, 1]");
    if (!(cfg.alpha_s >= 0.0) || !std::isfinite(cfg.alpha_s)) fail("alpha_s must be finite and >= 0");
    if (!(cfg.alpha_q >= 0.0) || !std::isfinite(cfg.alpha_q)) fail("alpha_q must be finite and >= 0");
    if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) fail("gamma must lie in [0, 1]");
    if (cfg.metrics_every == 0) fail("metrics_every must be positive");
    if (cfg.threads == 0) fail("threads must be positive");
    if (cfg.minibatch) {
        if (cfg.minibatch->size == 0) fail("minibatch size must be positive");
        if (cfg.minibatch->size > train_size)
            fail("minibatch size " + std::to_string(cfg.minibatch->size) + " exceeds dataset size " +
                 std::to_string(train_size));
        if (cfg.minibatch->reselect_every == 0) fail("minibatch reselect_every must be positive");
    }
    for (std::size_t k = 0; k < cfg.alpha_s_schedule.size(); ++k) {
        const auto& step = cfg.alpha_s_schedule[k];
        if (!(step.new_alpha_s >= 0.0) || !std::isfinite(step.new_alpha_s)) fail("schedule alpha_s must be >= 0");
        if (k > 0 && step.at_iteration <= cfg.alpha_s_schedule[k - 1].at_iteration)
            fail("schedule iterations must be strictly increasing");
    }
}

double alpha_s_at(const TrainerConfig& cfg, std::size_t iteration) {
    double alpha = cfg.alpha_s;
    for (const auto& step : cfg.alpha_s_schedule) {
        if (step.at_iteration > iteration) break;
        alpha = step.new_alpha_s;
    }
    return alpha;
}

std::vector<std::size_t> reselect_minibatch(std::size_t n, std::size_t size, Rng& rng) {
    if (size > n)
        throw ValidationError("minibatch size " + std::to_string(size) + " exceeds dataset size " + std::to_string(n));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < size; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(size);
    return idx;
}

TrainResult train(Mlp net, const QTable& policy, const Dataset& data, const Dataset* validation,
                  const TrainerConfig& cfg, std::ostream* csv_stream) {
    validate_dataset(data);
    if (data.input_dim() != net.input_dim() || data.output_dim() != net.output_dim())
        throw ValidationError("dataset is " + std::to_string(data.input_dim()) + "->" +
                              std::to_string(data.output_dim()) + " but the network is " +
                              std::to_string(net.input_dim()) + "->" + std::to_string(net.output_dim()));
    if (validation) {
        validate_dataset(*validation);
        if (validation->input_dim() != net.input_dim() || validation->output_dim() != net.output_dim())
            throw ValidationError("validation set shape does not match the network");
    }
    validate_config(cfg, data.size());

    QTable q = policy;
    if (cfg.train_policy) {
        q.set_gamma(cfg.gamma);
        q.set_alpha_q(cfg.alpha_q);
    }

    Rng action_rng(mix_seed(cfg.seed, kActionStream));
    Rng batch_rng(mix_seed(cfg.seed, kBatchStream));
    std::vector<Rng> chunk_rngs;
    for (std::size_t c = 0; c < cfg.threads; ++c) chunk_rngs.emplace_back(mix_seed(cfg.seed, kChunkStreamBase + c));

    Dataset batch_store;
    const Dataset* batch = &data;
    auto reselect = [&] {
        batch_store = data.subset(reselect_minibatch(data.size(), cfg.minibatch->size, batch_rng));
        batch = &batch_store;
    };
    if (cfg.minibatch) reselect();

    auto batch_loss = [&](std::size_t iteration) {
        const double value = loss_from_outputs(net.loss_kind(), forward_unchecked(net, batch->X), batch->Y);
        if (!std::isfinite(value)) {
            const std::size_t layer = diverged_layer(net, batch->X);
            throw DivergenceError(iteration, layer,
                                  "loss became non-finite at iteration " + std::to_string(iteration) +
                                      " (layer " + std::to_string(layer) + ")");
        }
        return value;
    };

    const std::size_t eval_every = cfg.eval_every == 0 ? cfg.metrics_every : cfg.eval_every;
    MetricsLog log;
    auto emit = [&](MetricsRow row, bool evaluate) {
        if (evaluate) {
            const Matrix out = forward_unchecked(net, data.X);
            row.train_acc = accuracy_from_outputs(out, data.Y);
            if (validation) {
                const Matrix vout = forward_unchecked(net, validation->X);
                row.val_loss = loss_from_outputs(net.loss_kind(), vout, validation->Y);
                row.val_acc = accuracy_from_outputs(vout, validation->Y);
            }
        }
        if (csv_stream) *csv_stream << MetricsLog::csv_row(row) << '\n';
        log.append(std::move(row));
    };

    if (csv_stream) *csv_stream << MetricsLog::csv_header() << '\n';

    double old_loss = batch_loss(0);
    emit({.iteration = 0, .train_loss = old_loss, .alpha_s = alpha_s_at(cfg, 0)}, true);

    SynapseField field(net);
    const std::size_t n = field.size();
    bool rebased = false;
    std::size_t next_step = 0;

    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        const double alpha = alpha_s_at(cfg, t);
        bool schedule_change = false;
        while (next_step < cfg.alpha_s_schedule.size() && cfg.alpha_s_schedule[next_step].at_iteration <= t) {
            schedule_change |= cfg.alpha_s_schedule[next_step].at_iteration == t;
            ++next_step;
        }

        if (cfg.threads == 1) {
            field.act(0, n, q, cfg.epsilon, alpha, action_rng);
        } else {
            const std::size_t chunk = (n + cfg.threads - 1) / cfg.threads;
            std::vector<std::jthread> workers;
            for (std::size_t c = 1; c < cfg.threads; ++c) {
                const std::size_t b = std::min(n, c * chunk), e = std::min(n, (c + 1) * chunk);
                workers.emplace_back([&, b, e, c] { field.act(b, e, q, cfg.epsilon, alpha, chunk_rngs[c]); });
            }
            field.act(0, std::min(n, chunk), q, cfg.epsilon, alpha, chunk_rngs[0]);
        }

        const double new_loss = batch_loss(t);
        const RewardSign reward = reward_from_losses(old_loss, new_loss);
        old_loss = new_loss;
        field.observe(reward);
        // Iteration 1 starts from the synthetic initial history, so it teaches nothing.
        if (cfg.train_policy && t > 1) field.learn(q, reward, cfg.td_form);

        const bool boundary = rebased;
        rebased = false;
        if (cfg.minibatch && t % cfg.minibatch->reselect_every == 0 && t < cfg.iterations) {
            reselect();
            old_loss = batch_loss(t);
            rebased = true;
        }

        const bool evaluate = t % eval_every == 0 || t == cfg.iterations;
        if (t % cfg.metrics_every == 0 || evaluate || boundary || schedule_change) {
            emit({.iteration = t,
                  .train_loss = new_loss,
                  .reward = sign_of(reward),
                  .alpha_s = alpha,
                  .batch_boundary = boundary},
                 evaluate);
        }
    }

    return {cfg.train_policy ? q : policy, std::move(net), std::move(log)};
}

}  // namespace synrl

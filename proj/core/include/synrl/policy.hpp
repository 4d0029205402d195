#pragma once

#include "synrl/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace synrl {

// Canonical indices 0/1/2 map to signs -1/0/+1.
enum class ActionSign : std::uint8_t { Dec = 0, Null = 1, Inc = 2 };
// Canonical indices 0/1 map to rewards -1/+1.
enum class RewardSign : std::uint8_t { Neg = 0, Pos = 1 };

inline constexpr std::size_t kActionCount = 3;
inline constexpr std::size_t kStateCount = 36;
inline constexpr std::string_view kEncodingId = "a1a2r1r2-v1";

constexpr int sign_of(ActionSign a) noexcept { return static_cast<int>(a) - 1; }
constexpr int sign_of(RewardSign r) noexcept { return r == RewardSign::Pos ? 1 : -1; }
constexpr std::size_t index_of(ActionSign a) noexcept { return static_cast<std::size_t>(a); }
constexpr std::size_t index_of(RewardSign r) noexcept { return static_cast<std::size_t>(r); }

// What one synapse remembers: its last two actions and the last two global rewards.
struct SynapseHistory {
    ActionSign a_prev1 = ActionSign::Null;
    ActionSign a_prev2 = ActionSign::Null;
    RewardSign r_prev1 = RewardSign::Neg;
    RewardSign r_prev2 = RewardSign::Neg;

    bool operator==(const SynapseHistory&) const = default;

    // Shift in the action just taken and the reward it earned.
    void push(ActionSign action, RewardSign reward) noexcept {
        a_prev2 = a_prev1;
        a_prev1 = action;
        r_prev2 = r_prev1;
        r_prev1 = reward;
    }
};

// ((a1 * 3 + a2) * 2 + r1) * 2 + r2
constexpr std::size_t encode_state(const SynapseHistory& h) noexcept {
    return ((index_of(h.a_prev1) * 3 + index_of(h.a_prev2)) * 2 + index_of(h.r_prev1)) * 2 + index_of(h.r_prev2);
}

SynapseHistory decode_state(std::size_t state);

// Update rule variants. Standard is the usual Q-learning target. PrintedVariant
// applies the discount to the whole difference: Q += a * (R + g * (max Q' - Q)).
enum class TdForm { Standard, PrintedVariant };

/// The single shared 36 x 3 expected-reward table, zero-initialized.
class QTable {
public:
    QTable(double gamma = 0.9, double alpha_q = 0.01);

    double gamma() const { return gamma_; }
    double alpha_q() const { return alpha_q_; }
    void set_alpha_q(double alpha_q);
    void set_gamma(double gamma);

    double value(std::size_t state, ActionSign a) const { return values_[state][index_of(a)]; }
    double& value(std::size_t state, ActionSign a) { return values_[state][index_of(a)]; }
    const std::array<double, kActionCount>& row(std::size_t state) const { return values_[state]; }

    double max_value(std::size_t state) const;

    // Q(s, a) <- Q(s, a) + alpha_q * [R + gamma * max_a' Q(s', a') - Q(s, a)]. One entry changes.
    void td_update(std::size_t s_prev, ActionSign a_prev, RewardSign reward, std::size_t s_next,
                   TdForm form = TdForm::Standard);

    bool operator==(const QTable& other) const = default;

private:
    std::array<std::array<double, kActionCount>, kStateCount> values_{};
    double gamma_;
    double alpha_q_;
};

// Epsilon-greedy: with probability epsilon a uniform action, otherwise an argmax of
// the state's row with ties broken uniformly. Always draws one uniform first.
ActionSign select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng);

// Pos iff loss_prev > loss_curr; equal losses earn Neg. NaN is rejected.
RewardSign reward_from_losses(double loss_prev, double loss_curr);

constexpr double apply_action(double weight, ActionSign a, double alpha_s) noexcept {
    switch (a) {
    case ActionSign::Dec: return weight - alpha_s;
    case ActionSign::Inc: return weight + alpha_s;
    case ActionSign::Null: break;
    }
    return weight;
}

// Policy file: {format_version, gamma, alpha_q, encoding_id, values[36][3]}.
std::string qtable_to_json(const QTable& q);
QTable qtable_from_json(std::string_view text);

inline constexpr int kPolicyFormatVersion = 1;

}  // namespace synrl

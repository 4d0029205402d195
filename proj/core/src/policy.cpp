#include "synrl/policy.hpp"

#include "synrl/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace synrl {

SynapseHistory decode_state(std::size_t state) {
    if (state >= kStateCount) throw ValidationError("state index " + std::to_string(state) + " out of range");
    SynapseHistory h;
    h.r_prev2 = static_cast<RewardSign>(state % 2);
    state /= 2;
    h.r_prev1 = static_cast<RewardSign>(state % 2);
    state /= 2;
    h.a_prev2 = static_cast<ActionSign>(state % 3);
    state /= 3;
    h.a_prev1 = static_cast<ActionSign>(state);
    return h;
}

QTable::QTable(double gamma, double alpha_q) : gamma_(gamma), alpha_q_(alpha_q) {
    set_gamma(gamma);
    set_alpha_q(alpha_q);
}

void QTable::set_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
    gamma_ = gamma;
}

void QTable::set_alpha_q(double alpha_q) {
    if (!(alpha_q >= 0.0) || !std::isfinite(alpha_q)) throw ValidationError("alpha_q must be finite and >= 0");
    alpha_q_ = alpha_q;
}

double QTable::max_value(std::size_t state) const {
    const auto& r = values_[state];
    return std::max({r[0], r[1], r[2]});
}

void QTable::td_update(std::size_t s_prev, ActionSign a_prev, RewardSign reward, std::size_t s_next, TdForm form) {
    double& q = values_[s_prev][index_of(a_prev)];
    const double r = sign_of(reward);
    const double best_next = max_value(s_next);
    if (form == TdForm::Standard)
        q = q + alpha_q_ * (r + gamma_ * best_next - q);
    else
        q = q + alpha_q_ * (r + gamma_ * (best_next - q));
}

ActionSign select_action(const QTable& q, std::size_t state, double epsilon, Rng& rng) {
    if (rng.uniform01() < epsilon) return static_cast<ActionSign>(rng.below(kActionCount));
    const auto& row = q.row(state);
    const double best = std::max({row[0], row[1], row[2]});
    std::array<std::uint8_t, kActionCount> ties{};
    std::size_t n = 0;
    for (std::size_t a = 0; a < kActionCount; ++a)
        if (row[a] == best) ties[n++] = static_cast<std::uint8_t>(a);
    if (n == 1) return static_cast<ActionSign>(ties[0]);
    return static_cast<ActionSign>(ties[rng.below(n)]);
}

RewardSign reward_from_losses(double loss_prev, double loss_curr) {
    if (std::isnan(loss_prev) || std::isnan(loss_curr)) throw ValidationError("reward from a NaN loss");
    return loss_prev > loss_curr ? RewardSign::Pos : RewardSign::Neg;
}

std::string qtable_to_json(const QTable& q) {
    nlohmann::ordered_json j;
    j["format_version"] = kPolicyFormatVersion;
    j["gamma"] = q.gamma();
    j["alpha_q"] = q.alpha_q();
    j["encoding_id"] = kEncodingId;
    auto& values = j["values"] = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < kStateCount; ++s) values.push_back(q.row(s));
    return j.dump(1);
}

QTable qtable_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("format_version").get<int>() != kPolicyFormatVersion)
            throw ValidationError("unsupported policy format_version " + j.at("format_version").dump());
        const auto id = j.at("encoding_id").get<std::string>();
        if (id != kEncodingId)
            throw ValidationError("policy encoding_id mismatch: file has '" + id + "', this build expects '" +
                                  std::string(kEncodingId) + "'");
        QTable q(j.at("gamma").get<double>(), j.at("alpha_q").get<double>());
        const auto& values = j.at("values");
        if (values.size() != kStateCount) throw ValidationError("policy must have 36 rows");
        for (std::size_t s = 0; s < kStateCount; ++s) {
            if (values[s].size() != kActionCount) throw ValidationError("policy rows must have 3 columns");
            for (std::size_t a = 0; a < kActionCount; ++a) {
                const double v = values[s][a].get<double>();
                if (!std::isfinite(v)) throw ValidationError("policy has a non-finite entry");
                q.value(s, static_cast<ActionSign>(a)) = v;
            }
        }
        return q;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed policy JSON: ") + e.what());
    }
}

}  // namespace synrl

#include "policy.hpp"

#include <algorithm>
#include <cmath>

namespace selprop {

PolicyParams::PolicyParams(std::size_t state_dim_, std::size_t hidden_, SeededRng& rng)
    : state_dim(state_dim_), hidden(hidden_), w_2("W_2", hidden_, state_dim_), w_1("W_1", 1, hidden_) {
    glorot_uniform(w_2.value, state_dim, hidden, rng);
    glorot_uniform(w_1.value, hidden, 1, rng);
}

PolicyEval policy_forward(const PolicyParams& p, std::span<const double> state) {
    PolicyEval e;
    e.hidden_pre = matvec(p.w_2.value, state);
    const Vector hidden = relu(e.hidden_pre);
    e.logit = matvec(p.w_1.value, hidden)[0];
    e.prob = sigmoid(e.logit);
    return e;
}

void policy_backward(PolicyParams& p, std::span<const double> state, const PolicyEval& eval, double g_logit) {
    const Vector hidden = relu(eval.hidden_pre);
    const double g_out[1] = {g_logit};
    Vector g_hidden(hidden.size(), 0.0);
    matvec_backward(p.w_1.value, hidden, g_out, &p.w_1.grad, g_hidden);
    Vector g_pre(hidden.size(), 0.0);
    relu_backward(eval.hidden_pre, g_hidden, g_pre);
    matvec_backward(p.w_2.value, state, g_pre, &p.w_2.grad, {});
}

double action_log_prob(const PolicyEval& eval, bool action) {
    // log sigmoid(z) = -log1p(exp(-z)), evaluated stably from the logit
    const double z = action ? eval.logit : -eval.logit;
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

ActionStrategy parse_action_strategy(const std::string& s) {
    if (s == "sampled") return ActionStrategy::sampled;
    if (s == "greedy") return ActionStrategy::greedy;
    if (s == "all") return ActionStrategy::all;
    if (s == "none") return ActionStrategy::none;
    if (s == "random") return ActionStrategy::random;
    throw Error("unknown action strategy '" + s + "'");
}

std::string to_string(ActionStrategy s) {
    switch (s) {
        case ActionStrategy::sampled: return "sampled";
        case ActionStrategy::greedy: return "greedy";
        case ActionStrategy::all: return "all";
        case ActionStrategy::none: return "none";
        case ActionStrategy::random: return "random";
    }
    return "greedy";
}

std::size_t ActionSet::updated() const {
    return static_cast<std::size_t>(std::count(actions.begin(), actions.end(), std::uint8_t{1}));
}

ActionSet select_actions(std::span<const double> probs, ActionStrategy strategy, SeededRng& rng) {
    ActionSet set;
    set.strategy = strategy;
    set.probs.assign(probs.begin(), probs.end());
    set.actions.reserve(probs.size());
    for (double pi : probs) {
        bool a = false;
        switch (strategy) {
            case ActionStrategy::sampled: a = rng.bernoulli(pi); break;
            case ActionStrategy::greedy: a = pi >= 0.5; break;
            case ActionStrategy::all: a = true; break;
            case ActionStrategy::none: a = false; break;
            case ActionStrategy::random: a = rng.bernoulli(0.5); break;
        }
        set.actions.push_back(a ? 1 : 0);
    }
    return set;
}

double compute_reward(std::span<const Vector> rows, std::size_t src_pos, std::size_t dst_pos,
                      std::span<const std::size_t> src_star, std::span<const std::size_t> dst_star) {
    auto term = [&](std::size_t center, std::span<const std::size_t> star) {
        if (star.empty()) return 0.0;
        double s = 0.0;
        for (auto i : star) s += cosine_similarity(rows[center], rows[i]);
        return s / static_cast<double>(star.size());
    };
    return term(src_pos, src_star) + term(dst_pos, dst_star);
}

bool self_critical_update(PolicyParams& p, std::span<const Vector> states, std::span<const PolicyEval> evals,
                          const ActionSet& sampled, const RewardRecord& reward, const AdamConfig& adam) {
    const double adv = reward.advantage();
    if (adv == 0.0 || sampled.actions.empty()) return false;
    const double n = static_cast<double>(sampled.actions.size());
    for (std::size_t i = 0; i < sampled.actions.size(); ++i) {
        // d log pi(a|s) / d logit = a - pi; descend on the negated objective
        const double g_logit = -(adv / n) * (static_cast<double>(sampled.actions[i]) - evals[i].prob);
        policy_backward(p, states[i], evals[i], g_logit);
    }
    adam_step(p.w_2, adam);
    adam_step(p.w_1, adam);
    return true;
}

}  // namespace selprop

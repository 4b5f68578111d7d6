#pragma once

// Per-node update/retain agent: a two-layer policy over s_i = h_i || m,
// action selection strategies, the local-structure stability reward and
// the self-critical policy-gradient step.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace selprop {

struct PolicyParams {
    std::size_t state_dim = 0;
    std::size_t hidden = 0;
    Parameter w_2;  // hidden x state_dim
    Parameter w_1;  // 1 x hidden

    PolicyParams() = default;
    PolicyParams(std::size_t state_dim, std::size_t hidden, SeededRng& rng);
};

struct PolicyEval {
    Vector hidden_pre;
    double logit = 0.0;
    double prob = 0.5;
};

/// sigmoid(W_1 relu(W_2 s))
PolicyEval policy_forward(const PolicyParams& p, std::span<const double> state);

/// Accumulates W_1/W_2 gradients for an upstream gradient on the logit.
void policy_backward(PolicyParams& p, std::span<const double> state, const PolicyEval& eval, double g_logit);

/// log pi(a | s): log pi for a = 1, log(1 - pi) for a = 0.
double action_log_prob(const PolicyEval& eval, bool action);

enum class ActionStrategy { sampled, greedy, all, none, random };

ActionStrategy parse_action_strategy(const std::string& s);
std::string to_string(ActionStrategy s);

struct ActionSet {
    std::vector<std::uint8_t> actions;
    std::vector<double> probs;
    ActionStrategy strategy = ActionStrategy::greedy;

    std::size_t size() const { return actions.size(); }
    std::size_t updated() const;
    bool same_actions(const ActionSet& o) const { return actions == o.actions; }
};

ActionSet select_actions(std::span<const double> probs, ActionStrategy strategy, SeededRng& rng);

/// Mean cosine of each center with its neighbors, summed over both
/// centers. `rows` are post-event embeddings indexed by neighborhood
/// position; an empty neighbor list contributes 0.
double compute_reward(std::span<const Vector> rows, std::size_t src_pos, std::size_t dst_pos,
                      std::span<const std::size_t> src_star, std::span<const std::size_t> dst_star);

struct RewardRecord {
    double r = 0.0;
    double r_hat = 0.0;
    double advantage() const { return r - r_hat; }
};

/// Gradient ascent on (r - r_hat) * mean_i log pi(a_i | s_i) via Adam.
/// Returns false (and leaves the parameters and optimizer state
/// untouched) when the advantage is exactly zero.
bool self_critical_update(PolicyParams& p, std::span<const Vector> states, std::span<const PolicyEval> evals,
                          const ActionSet& sampled, const RewardRecord& reward, const AdamConfig& adam);

}  // namespace selprop

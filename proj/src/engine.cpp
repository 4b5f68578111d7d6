#include "engine.hpp"

#include <cmath>

namespace selprop {

SelectionStrategy parse_selection_strategy(const std::string& s) {
    if (s == "learned") return SelectionStrategy::learned;
    if (s == "all") return SelectionStrategy::all;
    if (s == "none") return SelectionStrategy::none;
    if (s == "random") return SelectionStrategy::random;
    throw Error("unknown strategy '" + s + "' (expected learned, all, none or random)");
}

std::string to_string(SelectionStrategy s) {
    switch (s) {
        case SelectionStrategy::learned: return "learned";
        case SelectionStrategy::all: return "all";
        case SelectionStrategy::none: return "none";
        case SelectionStrategy::random: return "random";
    }
    return "learned";
}

NegativeScope parse_negative_scope(const std::string& s) {
    if (s == "auto") return NegativeScope::automatic;
    if (s == "all_nodes") return NegativeScope::all_nodes;
    if (s == "destination_partition") return NegativeScope::destination_partition;
    throw Error("unknown negative scope '" + s + "' (expected auto, all_nodes or destination_partition)");
}

std::string to_string(NegativeScope s) {
    switch (s) {
        case NegativeScope::automatic: return "auto";
        case NegativeScope::all_nodes: return "all_nodes";
        case NegativeScope::destination_partition: return "destination_partition";
    }
    return "auto";
}

void TrainConfig::validate() const {
    if (d == 0) throw Error("config: d must be positive");
    if (d_h == 0) throw Error("config: d_h must be positive");
    if (!(lr > 0.0)) throw Error("config: lr must be positive");
    if (policy_lr < 0.0) throw Error("config: policy_lr must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("config: dropout must be in [0, 1)");
    if (patience < 1) throw Error("config: patience must be >= 1");
    if (max_epochs < 1) throw Error("config: max_epochs must be >= 1");
    if (train_noise_sigma2 < 0.0) throw Error("config: train_noise_sigma2 must be non-negative");
    if (time_scale == TimeScale::Mode::fixed && !(time_scale_value > 0.0))
        throw Error("config: time_scale_value must be positive");
}

EmbeddingTable initial_embeddings(const DatasetBundle& bundle, const TrainConfig& cfg) {
    if (bundle.raw_node_features) return feature_embeddings(*bundle.raw_node_features, cfg.d);
    SeededRng rng = SeededRng::derive(cfg.seed, 2);
    return random_embeddings(bundle.n_nodes, cfg.d, rng);
}

ModelState init_model_state(const DatasetBundle& bundle, const TrainConfig& cfg) {
    cfg.validate();
    ModelState s;
    s.params = ModelParams(cfg.d, bundle.d_e, cfg.d_h, cfg.seed);
    s.table = initial_embeddings(bundle, cfg);
    s.adj = TemporalAdjacency(bundle.n_nodes);
    s.time_scale = make_time_scale(cfg.time_scale, cfg.time_scale_value, bundle);
    return s;
}

void reset_stream(ModelState& state, const DatasetBundle& bundle, const TrainConfig& cfg) {
    state.table = initial_embeddings(bundle, cfg);
    state.adj.reset();
    state.cursor = 0;
}

NegativeSampler::NegativeSampler(const DatasetBundle& bundle, NegativeScope scope) {
    const bool partition = scope == NegativeScope::destination_partition ||
                           (scope == NegativeScope::automatic && bundle.bipartite);
    lo_ = partition ? static_cast<NodeId>(bundle.first_partition_size) : 0;
    hi_ = static_cast<NodeId>(bundle.n_nodes);
    if (lo_ >= hi_) throw Error("negative sampler: empty candidate range");
}

NodeId NegativeSampler::sample(SeededRng& rng, NodeId avoid) const {
    const std::size_t span = hi_ - lo_;
    NodeId n = lo_ + static_cast<NodeId>(rng.index(span));
    while (span > 1 && n == avoid) n = lo_ + static_cast<NodeId>(rng.index(span));
    return n;
}

EventOutcome process_event(ModelState& state, const InteractionEvent& e, const TrainConfig& cfg, StepContext& ctx) {
    const Neighborhood nb = gather_neighborhood(state.adj, e, cfg.k);
    const std::size_t n = nb.size();

    std::vector<Vector> clean(n), agg_read;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = state.table.row(nb.nodes[i]);
        clean[i].assign(r.begin(), r.end());
    }
    // noise perturbs what the aggregation reads from neighbor rows
    if (ctx.noise_sigma2 > 0.0) {
        if (!ctx.noise_rng) throw Error("process_event: noise requested without a noise stream");
        const double sd = std::sqrt(ctx.noise_sigma2);
        agg_read = clean;
        for (std::size_t i = 0; i < n; ++i) {
            if (nb.is_center(i)) continue;
            for (auto& v : agg_read[i]) v += ctx.noise_rng->normal(0.0, sd);
        }
    }

    const EventOptions opt{state.time_scale, cfg.ablate_agg_time, cfg.ablate_prop_time};
    DropoutMasks masks;
    if (ctx.learn && cfg.dropout > 0.0) masks = draw_dropout(cfg.dropout, n, state.params.d_m(), *ctx.action_rng);
    const EventEncoding enc = encode_event(state.params, clean, nb, e.edge_features, opt, masks, agg_read);

    ActionStrategy taken_strategy = ActionStrategy::greedy;
    switch (cfg.strategy) {
        case SelectionStrategy::learned:
            taken_strategy = ctx.learn ? ActionStrategy::sampled : ActionStrategy::greedy;
            break;
        case SelectionStrategy::all: taken_strategy = ActionStrategy::all; break;
        case SelectionStrategy::none: taken_strategy = ActionStrategy::none; break;
        case SelectionStrategy::random: taken_strategy = ActionStrategy::random; break;
    }
    SeededRng fallback(0);
    SeededRng& arng = ctx.action_rng ? *ctx.action_rng : fallback;
    if ((taken_strategy == ActionStrategy::sampled || taken_strategy == ActionStrategy::random) && !ctx.action_rng)
        throw Error("process_event: stochastic actions without an action stream");
    const ActionSet taken = select_actions(enc.probs, taken_strategy, arng);
    const UpdatedRows after = apply_updates(taken, enc.h, clean, clean, state.params.updater);

    EventOutcome out;
    out.reward = compute_reward(after.rows, nb.src_pos, nb.dst_pos, nb.src_star, nb.dst_star);
    out.reward_baseline = out.reward;

    if (ctx.learn) {
        const ActionSet greedy = select_actions(enc.probs, ActionStrategy::greedy, arng);
        if (!greedy.same_actions(taken)) {
            const UpdatedRows g = apply_updates(greedy, enc.h, clean, clean, state.params.updater);
            out.reward_baseline = compute_reward(g.rows, nb.src_pos, nb.dst_pos, nb.src_star, nb.dst_star);
        }
        if (cfg.strategy == SelectionStrategy::learned) {
            AdamConfig pa;
            pa.lr = cfg.effective_policy_lr();
            out.policy_stepped = self_critical_update(state.params.policy, enc.states, enc.policy, taken,
                                                      {out.reward, out.reward_baseline}, pa);
        }

        if (!ctx.negatives || !ctx.negative_rng) throw Error("process_event: learning without a negative sampler");
        const NodeId neg = ctx.negatives->sample(*ctx.negative_rng, e.destination);
        const auto x_neg = state.table.row(neg);
        const LinkLoss loss = link_loss(after.rows[nb.src_pos], after.rows[nb.dst_pos], x_neg);
        out.loss = loss.loss;
        event_backward(state.params, clean, nb, enc, masks, taken, after, loss, nullptr, agg_read);
        AdamConfig sa;
        sa.lr = cfg.lr;
        for (Parameter* p : state.params.supervised()) {
            clip_grad_norm(*p, cfg.grad_clip);
            adam_step(*p, sa);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const bool center = nb.is_center(i);
        ++out.nodes;
        if (!center) ++out.neighbor_nodes;
        if (taken.actions[i]) {
            ++out.updated;
            if (!center) ++out.neighbor_updated;
            auto dst = state.table.x.row(nb.nodes[i]);
            std::copy(after.rows[i].begin(), after.rows[i].end(), dst.begin());
            state.table.last_update[nb.nodes[i]] = e.timestamp;
        }
        if (ctx.action_log)
            ctx.action_log->push_back({ctx.event_index, nb.nodes[i], enc.probs[i], taken.actions[i],
                                       ctx.noise_sigma2});
    }
    state.adj.insert_event(e);
    ++state.cursor;
    return out;
}

}  // namespace selprop

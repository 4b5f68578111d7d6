#include "trainer.hpp"

namespace selprop {

EpochReport train_epoch(const DatasetBundle& bundle, ModelState& state, const TrainConfig& cfg,
                        TrainStreams& streams) {
    if (state.cursor != 0) throw Error("train_epoch: stream not at the start of the dataset");
    const NegativeSampler sampler(bundle, cfg.negative_scope);
    SeededRng noise_rng = SeededRng::derive(cfg.seed, 9);
    StepContext ctx;
    ctx.learn = true;
    ctx.noise_sigma2 = cfg.train_noise_sigma2;
    ctx.noise_rng = &noise_rng;
    ctx.action_rng = &streams.action;
    ctx.negative_rng = &streams.negative;
    ctx.negatives = &sampler;

    EpochReport r;
    double loss = 0.0, reward = 0.0;
    std::size_t nodes = 0, updated = 0;
    for (std::size_t i = 0; i < bundle.train_end; ++i) {
        ctx.event_index = i;
        const auto out = process_event(state, bundle.events[i], cfg, ctx);
        loss += out.loss;
        reward += out.reward;
        nodes += out.nodes;
        updated += out.updated;
        r.policy_steps += out.policy_stepped ? 1 : 0;
    }
    const auto n = static_cast<double>(bundle.train_end);
    if (bundle.train_end > 0) {
        r.mean_loss = loss / n;
        r.mean_reward = reward / n;
    }
    r.update_rate = nodes ? static_cast<double>(updated) / static_cast<double>(nodes) : 0.0;
    return r;
}

bool EarlyStopping::observe(double metric) {
    if (seen_++ == 0 || metric > best_) {
        best_ = metric;
        bad_epochs_ = 0;
        return true;
    }
    ++bad_epochs_;
    return false;
}

FitResult fit(const DatasetBundle& bundle, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    ModelState state = init_model_state(bundle, cfg);
    TrainStreams streams = TrainStreams::from_seed(cfg.seed);

    FitResult result;
    EarlyStopping stopper(cfg.patience);
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        if (cfg.persist_embeddings) {
            state.adj.reset();
            state.cursor = 0;
        } else {
            reset_stream(state, bundle, cfg);
        }
        EpochReport report = train_epoch(bundle, state, cfg, streams);
        report.epoch = epoch;

        StreamSettings val;
        val.compute_mrr = false;
        val.negative_stream = 4;
        const auto metrics = evaluate_stream(state, bundle, bundle.train_end, bundle.val_end, cfg, val);
        report.val_metric = metrics.ap.value_or(0.0);
        result.history.push_back(report);
        if (on_epoch) on_epoch(report);

        if (stopper.observe(report.val_metric)) {
            result.best = state;
            result.best_epoch = epoch;
        } else if (stopper.should_stop()) {
            break;
        }
    }
    return result;
}

}  // namespace selprop

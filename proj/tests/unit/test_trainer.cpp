#include <cmath>
#include <set>

#include "doctest.h"
#include "synthetic.hpp"
#include "test_support.hpp"
#include "trainer.hpp"

using namespace selprop;

namespace {

DatasetBundle toy_bundle(std::uint64_t seed, std::size_t events) {
    SyntheticSpec spec;
    spec.n_communities = 3;
    spec.nodes_per_community = 10;
    spec.n_events = events;
    auto data = generate_synthetic(spec, seed);
    return bundle_from_events(data.events, data.n_nodes, "toy");
}

TrainConfig toy_config() {
    TrainConfig cfg;
    cfg.d = 6;
    cfg.d_h = 8;
    cfg.k = 10;
    cfg.lr = 1e-3;
    cfg.max_epochs = 2;
    return cfg;
}

struct Stepper {
    TrainStreams streams = TrainStreams::from_seed(0);
    SeededRng noise = SeededRng(9);
    NegativeSampler sampler;
    std::vector<ActionLogRow> log;
    StepContext ctx;

    explicit Stepper(const DatasetBundle& b) : sampler(b, NegativeScope::automatic) {
        ctx.learn = true;
        ctx.action_rng = &streams.action;
        ctx.negative_rng = &streams.negative;
        ctx.noise_rng = &noise;
        ctx.negatives = &sampler;
        ctx.action_log = &log;
    }
};

}  // namespace

TEST_CASE("config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lr = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.dropout = 1.0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    cfg.patience = 0;
    CHECK_THROWS(cfg.validate());
    cfg = {};
    CHECK(cfg.effective_policy_lr() == cfg.lr);
    cfg.policy_lr = 0.5;
    CHECK(cfg.effective_policy_lr() == 0.5);
}

TEST_CASE("negative sampler") {
    DatasetBundle b;
    b.n_nodes = 5;
    b.bipartite = true;
    b.first_partition_size = 3;
    SeededRng rng(1);
    NegativeSampler part(b, NegativeScope::automatic);
    NegativeSampler all(b, NegativeScope::all_nodes);
    std::set<NodeId> seen_part, seen_all;
    for (int i = 0; i < 500; ++i) {
        auto n = part.sample(rng, 3);
        CHECK(n == 4);
        seen_part.insert(n);
        auto m = all.sample(rng, 0);
        CHECK(m != 0);
        seen_all.insert(m);
    }
    CHECK(seen_all.size() == 4);
}

TEST_CASE("only selected rows of the neighborhood change") {
    auto bundle = toy_bundle(1, 200);
    auto cfg = toy_config();
    auto state = init_model_state(bundle, cfg);
    Stepper st(bundle);
    for (std::size_t i = 0; i < bundle.train_end; ++i) {
        const Tensor before = state.table.x;
        const auto nb = gather_neighborhood(state.adj, bundle.events[i], cfg.k);
        st.log.clear();
        process_event(state, bundle.events[i], cfg, st.ctx);
        std::set<NodeId> selected;
        for (const auto& row : st.log)
            if (row.action) selected.insert(row.node);
        REQUIRE(st.log.size() == nb.size());
        for (NodeId v = 0; v < bundle.n_nodes; ++v) {
            const bool changed = !std::equal(before.row(v).begin(), before.row(v).end(), state.table.x.row(v).begin());
            if (changed) CHECK(selected.count(v) == 1);
            if (!selected.count(v)) CHECK_FALSE(changed);
        }
    }
}

TEST_CASE("strategy none keeps the table constant") {
    auto bundle = toy_bundle(2, 200);
    for (std::size_t k : {0u, 10u}) {
        auto cfg = toy_config();
        cfg.strategy = SelectionStrategy::none;
        cfg.k = k;
        auto state = init_model_state(bundle, cfg);
        const auto initial = state.table;
        auto streams = TrainStreams::from_seed(cfg.seed);
        auto report = train_epoch(bundle, state, cfg, streams);
        CHECK(std::isfinite(report.mean_loss));
        CHECK(state.table.x == initial.x);
        CHECK(report.update_rate == 0.0);
        CHECK(report.policy_steps == 0);
    }
}

TEST_CASE("seeded training is reproducible") {
    auto bundle = toy_bundle(3, 200);
    auto cfg = toy_config();
    auto a = fit(bundle, cfg);
    auto b = fit(bundle, cfg);
    CHECK(a.history == b.history);
    CHECK(a.best.table == b.best.table);
    cfg.seed = 1;
    auto c = fit(bundle, cfg);
    CHECK_FALSE(a.history == c.history);
}

TEST_CASE("fit epoch accounting") {
    auto bundle = toy_bundle(4, 150);
    auto cfg = toy_config();
    cfg.max_epochs = 1;
    std::size_t calls = 0;
    auto r = fit(bundle, cfg, [&](const EpochReport&) { ++calls; });
    CHECK(r.history.size() == 1);
    CHECK(calls == 1);
    CHECK(r.best_epoch == 1);
    CHECK(r.best.cursor == bundle.val_end);
    CHECK(r.history[0].val_metric > 0.0);
}

TEST_CASE("early stopping rule") {
    EarlyStopping p1(1);
    CHECK(p1.observe(0.5));
    CHECK_FALSE(p1.should_stop());
    CHECK_FALSE(p1.observe(0.4));
    CHECK(p1.should_stop());

    EarlyStopping p2(2);
    CHECK(p2.observe(0.5));
    CHECK_FALSE(p2.observe(0.5));  // ties do not count as improvement
    CHECK_FALSE(p2.should_stop());
    CHECK(p2.observe(0.6));
    CHECK_FALSE(p2.observe(0.1));
    CHECK_FALSE(p2.observe(0.2));
    CHECK(p2.should_stop());
    CHECK(p2.best() == 0.6);
}

TEST_CASE("patience bounds the number of epochs") {
    auto bundle = toy_bundle(5, 150);
    auto cfg = toy_config();
    cfg.patience = 1;
    cfg.max_epochs = 6;
    auto r = fit(bundle, cfg);
    // the loop stops right after the first non-improving epoch
    std::size_t expected = r.history.size();
    for (std::size_t i = 1; i < r.history.size(); ++i) {
        double best = 0.0;
        for (std::size_t j = 0; j < i; ++j) best = std::max(best, r.history[j].val_metric);
        if (r.history[i].val_metric <= best) {
            expected = i + 1;
            break;
        }
    }
    CHECK(r.history.size() == expected);
}

TEST_CASE("training loss decreases on a synthetic stream") {
    auto bundle = toy_bundle(6, 200);
    TrainConfig cfg;  // default hyperparameters
    cfg.max_epochs = 10;
    cfg.patience = 10;
    auto r = fit(bundle, cfg);
    REQUIRE(r.history.size() == 10);
    MESSAGE("loss epoch 1 = " << r.history.front().mean_loss << ", epoch 10 = " << r.history.back().mean_loss);
    CHECK(r.history.back().mean_loss < r.history.front().mean_loss);
}

TEST_CASE("clique of identical embeddings earns the maximum reward") {
    // four nodes, every pair interacts repeatedly
    std::vector<InteractionEvent> events;
    double t = 0.0;
    for (int round = 0; round < 3; ++round)
        for (NodeId a = 0; a < 4; ++a)
            for (NodeId b = a + 1; b < 4; ++b) events.push_back({a, b, t += 1.0, {}});
    auto bundle = bundle_from_events(events, 4, "clique");
    auto cfg = toy_config();
    auto state = init_model_state(bundle, cfg);
    for (NodeId v = 0; v < 4; ++v)
        for (std::size_t c = 0; c < cfg.d; ++c) state.table.x(v, c) = 0.1 * static_cast<double>(c + 1);
    // W_u = [I 0]: an update copies the (non-negative) row
    auto& w = state.params.updater.w_u.value;
    w.fill(0.0);
    for (std::size_t i = 0; i < cfg.d; ++i) w(i, i) = 1.0;

    SeededRng action(1);
    StepContext ctx;
    ctx.action_rng = &action;
    for (const auto& e : events) {
        const auto nb = gather_neighborhood(state.adj, e, cfg.k);
        const auto out = process_event(state, e, cfg, ctx);
        if (!nb.src_star.empty() && !nb.dst_star.empty()) CHECK(out.reward == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("strategy all with time ablations is pinned") {
    auto bundle = toy_bundle(7, 200);
    auto cfg = toy_config();
    cfg.strategy = SelectionStrategy::all;
    cfg.ablate_agg_time = true;
    cfg.ablate_prop_time = true;
    cfg.max_epochs = 2;
    auto r = fit(bundle, cfg);
    StreamSettings s;
    auto m = evaluate_stream(r.best, bundle, bundle.val_end, bundle.events.size(), cfg, s);
    // values recorded from this implementation; any drift means the pipeline changed
    CHECK(r.history.back().mean_loss == doctest::Approx(1.0008843083624273).epsilon(1e-12));
    CHECK(*m.mrr == doctest::Approx(0.31935185185185183).epsilon(1e-12));
    CHECK(*m.ap == doctest::Approx(0.44634621496040044).epsilon(1e-12));
    CHECK(*m.auc == doctest::Approx(0.2775).epsilon(1e-12));
}

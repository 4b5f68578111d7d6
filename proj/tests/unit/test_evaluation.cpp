#include <algorithm>
#include <cmath>
#include <utility>

#include "doctest.h"
#include "evaluation.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"
#include "trainer.hpp"

using namespace selprop;
using selprop::testing::random_vector;

namespace {

std::size_t oracle_rank(const std::vector<double>& scores, std::size_t positive) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (i != positive && !(scores[i] < scores[positive])) ++r;
    return r;
}

// Mean over positives of precision at that positive's score threshold (ties included),
// accumulated in descending-score order.
double oracle_ap(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<double> sorted = pos;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double sum = 0.0;
    for (double p : sorted) {
        double above = 0.0, above_pos = 0.0;
        for (double q : pos)
            if (q >= p) above_pos += 1.0, above += 1.0;
        for (double q : neg)
            if (q >= p) above += 1.0;
        sum += above_pos / above;
    }
    return sum / static_cast<double>(pos.size());
}

double oracle_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
    double s = 0.0;
    for (double p : pos)
        for (double q : neg) s += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
    return s / static_cast<double>(pos.size() * neg.size());
}

std::vector<double> coarse_scores(std::size_t n, SeededRng& rng) {
    // few distinct values so ties are common
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(rng.index(6)) / 5.0;
    return v;
}

DatasetBundle small_bundle(std::uint64_t seed, std::size_t events = 300) {
    SyntheticSpec spec;
    spec.n_communities = 3;
    spec.nodes_per_community = 10;
    spec.n_events = events;
    auto data = generate_synthetic(spec, seed);
    return bundle_from_events(data.events, data.n_nodes, "toy");
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.d = 6;
    cfg.d_h = 8;
    cfg.k = 10;
    cfg.max_epochs = 2;
    cfg.lr = 1e-3;
    return cfg;
}

}  // namespace

TEST_CASE("pessimistic rank matches counting") {
    SeededRng rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        auto s = coarse_scores(1 + rng.index(20), rng);
        const std::size_t p = rng.index(s.size());
        CHECK(pessimistic_rank(s, p) == oracle_rank(s, p));
    }
    const std::vector<double> all_tied(10, 0.3);
    CHECK(pessimistic_rank(all_tied, 4) == 10);
    const std::vector<double> single{0.1};
    CHECK(pessimistic_rank(single, 0) == 1);
    const std::vector<std::size_t> ranks{1, 2, 4};
    CHECK(mean_reciprocal_rank(ranks) == doctest::Approx((1.0 + 0.5 + 0.25) / 3.0));
}

TEST_CASE("average precision matches the brute-force definition") {
    SeededRng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const bool coarse = trial % 2 == 0;
        const std::size_t np = 1 + rng.index(15), nn = rng.index(15);
        auto pos = coarse ? coarse_scores(np, rng) : random_vector(np, rng, 0.0, 1.0);
        auto neg = coarse ? coarse_scores(nn, rng) : random_vector(nn, rng, 0.0, 1.0);
        CHECK(average_precision(pos, neg) == oracle_ap(pos, neg));
    }
    const std::vector<double> p{0.9, 0.8}, n{0.1, 0.2};
    CHECK(average_precision(p, n) == 1.0);
}

TEST_CASE("roc auc matches pair counting") {
    SeededRng rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const bool coarse = trial % 2 == 0;
        const std::size_t np = 1 + rng.index(15), nn = 1 + rng.index(15);
        auto pos = coarse ? coarse_scores(np, rng) : random_vector(np, rng);
        auto neg = coarse ? coarse_scores(nn, rng) : random_vector(nn, rng);
        CHECK(roc_auc(pos, neg) == doctest::Approx(oracle_auc(pos, neg)).epsilon(1e-15));
    }
    const std::vector<double> tied{0.5, 0.5};
    CHECK(roc_auc(tied, tied) == 0.5);
}

TEST_CASE("metric ranges on random scores") {
    SeededRng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        auto pos = random_vector(1 + rng.index(30), rng);
        auto neg = random_vector(1 + rng.index(30), rng);
        const double ap = average_precision(pos, neg), auc = roc_auc(pos, neg);
        CHECK(ap > 0.0);
        CHECK(ap <= 1.0);
        CHECK(auc >= 0.0);
        CHECK(auc <= 1.0);
    }
}

TEST_CASE("inductive filter") {
    DatasetBundle b;
    b.n_nodes = 5;
    b.inductive = {false, false, false, true, true};
    b.events = {{0, 1, 0.0, {}}, {0, 3, 1.0, {}}, {4, 1, 2.0, {}}, {1, 2, 3.0, {}}};
    CHECK(inductive_filter(b, 0, 4) == std::vector<bool>{false, true, true, false});
    CHECK(inductive_filter(b, 2, 3) == std::vector<bool>{true});
}

TEST_CASE("evaluation leaves parameters alone") {
    auto bundle = small_bundle(1);
    auto cfg = small_config();
    auto state = init_model_state(bundle, cfg);
    TrainStreams streams = TrainStreams::from_seed(cfg.seed);
    {
        const NegativeSampler sampler(bundle, cfg.negative_scope);
        StepContext ctx;
        ctx.learn = true;
        ctx.action_rng = &streams.action;
        ctx.negative_rng = &streams.negative;
        ctx.negatives = &sampler;
        for (std::size_t i = 0; i < bundle.train_end; ++i) process_event(state, bundle.events[i], cfg, ctx);
    }
    const ModelParams before = state.params;
    StreamSettings s;
    s.noise_sigma2 = 0.1;
    auto report = evaluate_stream(state, bundle, bundle.train_end, bundle.events.size(), cfg, s);
    for (std::size_t i = 0; i < before.all().size(); ++i) {
        const Parameter& a = *before.all()[i];
        const Parameter& b = *std::as_const(state.params).all()[i];
        CHECK(a.value == b.value);
        CHECK(a.adam_m == b.adam_m);
        CHECK(a.adam_v == b.adam_v);
        CHECK(a.step_count == b.step_count);
    }
    CHECK(state.cursor == bundle.events.size());
    REQUIRE(report.mrr.has_value());
    CHECK(*report.mrr > 0.0);
    CHECK(*report.mrr <= 1.0);
    CHECK(report.n_edges == bundle.events.size() - bundle.train_end);
}

TEST_CASE("reciprocal ranks ignore the scale of the table") {
    auto bundle = small_bundle(2);
    auto cfg = small_config();
    auto a = init_model_state(bundle, cfg);
    auto b = a;
    for (auto& v : b.table.x.values()) v *= 3.5;
    StreamSettings s;
    auto ra = evaluate_stream(a, bundle, 0, 1, cfg, s);
    auto rb = evaluate_stream(b, bundle, 0, 1, cfg, s);
    CHECK(ra.ranks == rb.ranks);
    CHECK(ra.mrr == rb.mrr);
}

TEST_CASE("evaluation is deterministic for a seed") {
    auto bundle = small_bundle(3);
    auto cfg = small_config();
    auto a = init_model_state(bundle, cfg);
    auto b = a;
    StreamSettings s;
    s.noise_sigma2 = 0.03;
    auto ra = evaluate_stream(a, bundle, 0, bundle.val_end, cfg, s);
    auto rb = evaluate_stream(b, bundle, 0, bundle.val_end, cfg, s);
    CHECK(ra.mrr == rb.mrr);
    CHECK(ra.ap == rb.ap);
    CHECK(ra.auc == rb.auc);
    CHECK(a.table == b.table);
}

TEST_CASE("empty inductive slice yields absent metrics") {
    DatasetBundle b;
    b.n_nodes = 2;
    for (int i = 0; i < 10; ++i) b.events.push_back({0, 1, double(i), {}});
    chronological_split(b);
    auto cfg = small_config();
    auto state = init_model_state(b, cfg);
    StreamSettings s;
    s.mode = EvalMode::inductive;
    auto r = evaluate_stream(state, b, 0, b.events.size(), cfg, s);
    CHECK(r.n_edges == 0);
    CHECK_FALSE(r.mrr.has_value());
    CHECK_FALSE(r.ap.has_value());
    CHECK(state.cursor == b.events.size());
}

#include <cmath>

#include "doctest.h"
#include "model.hpp"
#include "test_support.hpp"

using namespace selprop;
using selprop::testing::random_rows;
using selprop::testing::random_vector;
using selprop::testing::randomize;
using selprop::testing::zero_all_grads;

namespace {

ActionSet actions_of(std::vector<std::uint8_t> a) {
    ActionSet s;
    s.actions = std::move(a);
    s.probs.assign(s.actions.size(), 0.5);
    return s;
}

// Small event: source 0, destination 1, a handful of earlier neighbors.
struct Scene {
    TemporalAdjacency adj;
    InteractionEvent e;
    Neighborhood nb;
};

Scene make_scene(std::size_t d_e, SeededRng& rng) {
    Scene s{TemporalAdjacency(6), {}, {}};
    s.adj.insert_event({0, 2, 1.0, {}});
    s.adj.insert_event({1, 3, 1.5, {}});
    s.adj.insert_event({0, 4, 2.0, {}});
    s.adj.insert_event({1, 2, 2.5, {}});
    s.adj.insert_event({5, 1, 3.0, {}});
    s.e = {0, 1, 4.0, random_vector(d_e, rng)};
    s.nb = gather_neighborhood(s.adj, s.e, 10);
    return s;
}

}  // namespace

TEST_CASE("apply_updates") {
    SeededRng rng(1);
    UpdaterParams p(2, 3, rng);
    auto rows = random_rows(3, 2, rng);
    auto h = random_rows(3, 3, rng);

    SUBCASE("all retained is bit-identical") {
        auto out = apply_updates(actions_of({0, 0, 0}), h, rows, rows, p);
        CHECK(out.rows == rows);
    }
    SUBCASE("zero weights give zero rows") {
        p.w_u.value.fill(0.0);
        auto out = apply_updates(actions_of({1, 0, 1}), h, rows, rows, p);
        CHECK(out.rows[0] == Vector{0.0, 0.0});
        CHECK(out.rows[1] == rows[1]);
        CHECK(out.rows[2] == Vector{0.0, 0.0});
    }
    SUBCASE("hand instance") {
        // W_u = [[1, 0, 1, 0, 0], [0, -1, 0, 2, 1]], x = (1, 2), h = (0.5, -1, 3)
        const double w[] = {1, 0, 1, 0, 0, 0, -1, 0, 2, 1};
        std::copy(std::begin(w), std::end(w), p.w_u.value.values().begin());
        std::vector<Vector> x{{1.0, 2.0}}, hh{{0.5, -1.0, 3.0}};
        auto out = apply_updates(actions_of({1}), hh, x, x, p);
        // (1 + 0.5, -2 - 2 + 3) -> relu -> (1.5, 0)
        CHECK(out.rows[0] == Vector{1.5, 0.0});
    }
    SUBCASE("retained rows come from the retained source") {
        auto noisy = rows;
        noisy[1][0] += 10.0;
        auto out = apply_updates(actions_of({1, 0, 0}), h, noisy, rows, p);
        CHECK(out.rows[1] == rows[1]);
    }
}

TEST_CASE("link loss") {
    // x_s.x_d = 0 and x_s.x_n = 1
    const double xs[] = {1.0, 0.0}, xd[] = {0.0, 1.0}, xn[] = {1.0, 0.0};
    CHECK(link_loss(xs, xd, xn).loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));

    double prev = 1e9;
    for (double s = -5.0; s <= 5.0; s += 0.25) {
        const double a[] = {s, 0.0};
        const double b[] = {1.0, 0.0};
        const double n[] = {0.0, 1.0};
        const double l = link_loss(a, b, n).loss;
        CHECK(l < prev);
        prev = l;
    }

    SeededRng rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        auto s = random_vector(4, rng, -2, 2), d = random_vector(4, rng, -2, 2), n = random_vector(4, rng, -2, 2);
        auto l = link_loss(s, d, n);
        auto f = [&] { return link_loss(s, d, n).loss; };
        worst = std::max(worst, finite_difference_check(f, s, l.g_s));
        worst = std::max(worst, finite_difference_check(f, d, l.g_d));
        worst = std::max(worst, finite_difference_check(f, n, l.g_n));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("dropout masks") {
    SeededRng rng(3);
    auto none = draw_dropout(0.0, 4, 5, rng);
    CHECK(none.message.empty());
    CHECK(none.h.empty());
    CHECK_THROWS(draw_dropout(1.0, 1, 1, rng));
    auto m = draw_dropout(0.5, 200, 50, rng);
    double sum = 0.0;
    for (const auto& v : m.h)
        for (double x : v) {
            CHECK((x == 0.0 || x == 2.0));
            sum += x;
        }
    CHECK(std::abs(sum / (200.0 * 50.0) - 1.0) < 0.05);
}

TEST_CASE("event loss gradient on a 3-dim instance") {
    SeededRng rng(4);
    double worst = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        ModelParams p(3, 1, 4, 100 + trial);
        for (auto* q : p.all()) randomize(q->value, rng, -0.8, 0.8);
        auto scene = make_scene(1, rng);
        auto rows = random_rows(scene.nb.size(), 3, rng);
        auto x_neg = random_vector(3, rng);
        TimeScale ts{TimeScale::Mode::fixed, 1.3};
        const EventOptions opt{ts, trial % 5 == 1, trial % 5 == 2};
        const DropoutMasks masks = trial % 2 ? draw_dropout(0.3, scene.nb.size(), p.d_m(), rng) : DropoutMasks{};
        std::vector<std::uint8_t> a;
        for (std::size_t i = 0; i < scene.nb.size(); ++i) a.push_back(rng.bernoulli(0.6));
        const ActionSet acts = actions_of(a);

        auto enc = encode_event(p, rows, scene.nb, scene.e.edge_features, opt, masks);
        auto upd = apply_updates(acts, enc.h, rows, rows, p.updater);
        auto loss = link_loss(upd.rows[scene.nb.src_pos], upd.rows[scene.nb.dst_pos], x_neg);
        zero_all_grads(p.all());
        std::vector<Vector> g_rows(rows.size(), Vector(3, 0.0));
        event_backward(p, rows, scene.nb, enc, masks, acts, upd, loss, &g_rows);

        auto f = [&] { return event_loss(p, rows, scene.nb, scene.e.edge_features, opt, masks, acts, x_neg); };
        CHECK(f() == loss.loss);
        for (auto* q : p.supervised()) worst = std::max(worst, finite_difference_check(f, *q));
        // table reads are constants of the event: their gradient is exact
        for (std::size_t j = 0; j < rows.size(); ++j)
            worst = std::max(worst, finite_difference_check(f, rows[j], g_rows[j]));
        // the policy is not touched by the link loss
        CHECK(p.policy.w_1.grad == Tensor(p.policy.w_1.grad.rows(), p.policy.w_1.grad.cols()));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("event loss gradient with noisy aggregation reads") {
    SeededRng rng(14);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        ModelParams p(3, 0, 4, 200 + trial);
        for (auto* q : p.all()) randomize(q->value, rng, -0.8, 0.8);
        auto scene = make_scene(0, rng);
        auto rows = random_rows(scene.nb.size(), 3, rng);
        auto noisy = rows;
        for (std::size_t i = 0; i < noisy.size(); ++i)
            if (!scene.nb.is_center(i))
                for (auto& v : noisy[i]) v += rng.normal(0.0, 0.3);
        auto x_neg = random_vector(3, rng);
        const EventOptions opt{TimeScale{TimeScale::Mode::fixed, 2.0}, false, false};
        std::vector<std::uint8_t> a(scene.nb.size(), 1);
        const ActionSet acts = actions_of(a);
        auto enc = encode_event(p, rows, scene.nb, {}, opt, {}, noisy);
        auto clean_enc = encode_event(p, rows, scene.nb, {}, opt, {});
        CHECK_FALSE(enc.m == clean_enc.m);
        auto upd = apply_updates(acts, enc.h, rows, rows, p.updater);
        auto loss = link_loss(upd.rows[scene.nb.src_pos], upd.rows[scene.nb.dst_pos], x_neg);
        zero_all_grads(p.all());
        event_backward(p, rows, scene.nb, enc, {}, acts, upd, loss, nullptr, noisy);
        auto f = [&] { return event_loss(p, rows, scene.nb, {}, opt, {}, acts, x_neg, noisy); };
        for (auto* q : p.supervised()) worst = std::max(worst, finite_difference_check(f, *q));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("rate-0 dropout forward equals the mask-free forward") {
    SeededRng rng(5);
    ModelParams p(4, 0, 5, 7);
    auto scene = make_scene(0, rng);
    auto rows = random_rows(scene.nb.size(), 4, rng);
    const EventOptions opt{TimeScale{TimeScale::Mode::fixed, 1.0}, false, false};
    auto eval = encode_event(p, rows, scene.nb, {}, opt, {});
    auto train = encode_event(p, rows, scene.nb, {}, opt, draw_dropout(0.0, scene.nb.size(), p.d_m(), rng));
    CHECK(eval.h == train.h);
    CHECK(eval.m == train.m);
    CHECK(eval.probs == train.probs);
}

TEST_CASE("parameter shapes and seeding") {
    ModelParams p(5, 2, 7, 11);
    CHECK(p.d_m() == 12);
    CHECK(p.agg.w_g.value.shape_string() == "(5x5)");
    CHECK(p.agg.a.value.shape_string() == "(10x1)");
    CHECK(p.agg.w_p.value.shape_string() == "(5x12)");
    CHECK(p.updater.w_u.value.shape_string() == "(5x17)");
    CHECK(p.policy.w_2.value.shape_string() == "(7x24)");
    CHECK(p.policy.w_1.value.shape_string() == "(1x7)");
    ModelParams q(5, 2, 7, 11), r(5, 2, 7, 12);
    CHECK(p.agg.w_g.value == q.agg.w_g.value);
    CHECK_FALSE(p.agg.w_g.value == r.agg.w_g.value);
    CHECK_THROWS(ModelParams(0, 0, 1, 0));
}

TEST_CASE("feature embeddings pad and truncate") {
    Tensor f(2, 3);
    f(0, 0) = 1;
    f(0, 1) = 2;
    f(0, 2) = 3;
    auto wide = feature_embeddings(f, 5);
    CHECK(wide.x(0, 2) == 3.0);
    CHECK(wide.x(0, 4) == 0.0);
    auto narrow = feature_embeddings(f, 2);
    CHECK(narrow.x(0, 1) == 2.0);
    CHECK(narrow.last_update[1] == -1.0);
}

#include "model.hpp"

#include <algorithm>
#include <cmath>

namespace selprop {

EmbeddingTable random_embeddings(std::size_t n, std::size_t d, SeededRng& rng) {
    EmbeddingTable t(n, d);
    glorot_uniform(t.x, d, d, rng);
    return t;
}

EmbeddingTable feature_embeddings(const Tensor& features, std::size_t d) {
    EmbeddingTable t(features.rows(), d);
    const std::size_t c = std::min(d, features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i)
        std::copy_n(features.row(i).begin(), c, t.x.row(i).begin());
    return t;
}

UpdaterParams::UpdaterParams(std::size_t d_, std::size_t d_m_, SeededRng& rng)
    : d(d_), d_m(d_m_), w_u("W_u", d_, d_ + d_m_) {
    glorot_uniform(w_u.value, d + d_m, d, rng);
}

ModelParams::ModelParams(std::size_t d_, std::size_t d_e_, std::size_t d_h_, std::uint64_t seed)
    : d(d_), d_e(d_e_), d_h(d_h_) {
    if (d == 0 || d_h == 0) throw Error("model dimensions must be positive");
    SeededRng rng = SeededRng::derive(seed, 1);
    agg = AggregatorParams(d, d_e, rng);
    policy = PolicyParams(2 * d_m(), d_h, rng);
    updater = UpdaterParams(d, d_m(), rng);
}

std::vector<Parameter*> ModelParams::supervised() { return {&agg.w_g, &agg.a, &agg.w_p, &updater.w_u}; }
std::vector<Parameter*> ModelParams::policy_params() { return {&policy.w_2, &policy.w_1}; }
std::vector<Parameter*> ModelParams::all() {
    return {&agg.w_g, &agg.a, &agg.w_p, &updater.w_u, &policy.w_2, &policy.w_1};
}
std::vector<const Parameter*> ModelParams::all() const {
    return {&agg.w_g, &agg.a, &agg.w_p, &updater.w_u, &policy.w_2, &policy.w_1};
}

DropoutMasks draw_dropout(double rate, std::size_t positions, std::size_t d_m, SeededRng& rng) {
    DropoutMasks masks;
    if (rate <= 0.0) return masks;
    if (rate >= 1.0) throw Error("dropout rate must be < 1");
    const double keep_scale = 1.0 / (1.0 - rate);
    auto draw = [&](std::size_t n) {
        Vector v(n);
        for (auto& x : v) x = rng.bernoulli(rate) ? 0.0 : keep_scale;
        return v;
    };
    masks.message = draw(d_m);
    masks.h.reserve(positions);
    for (std::size_t i = 0; i < positions; ++i) masks.h.push_back(draw(d_m));
    return masks;
}

namespace {

Vector apply_mask(std::span<const double> x, const Vector& mask) {
    Vector y(x.begin(), x.end());
    if (!mask.empty())
        for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
    return y;
}

// -log sigmoid(z)
double softplus_neg(double z) { return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

}  // namespace

EventEncoding encode_event(const ModelParams& p, std::span<const Vector> rows, const Neighborhood& nb,
                           std::span<const double> edge_features, const EventOptions& opt,
                           const DropoutMasks& masks, std::span<const Vector> agg_rows) {
    EventEncoding enc;
    enc.message = build_interaction_message(p.agg, agg_rows.empty() ? rows : agg_rows, nb, edge_features, opt.time_scale, opt.ablate_agg_time);
    enc.m = apply_mask(enc.message.message.m, masks.message);
    enc.pack = propagate_intermediate(p.agg, rows, nb.delta_t, enc.m, opt.time_scale, opt.ablate_prop_time);
    const std::size_t n = nb.size();
    enc.h.reserve(n);
    enc.states.reserve(n);
    enc.policy.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        enc.h.push_back(apply_mask(enc.pack.h[i], masks.h.empty() ? Vector{} : masks.h[i]));
        enc.states.push_back(concat(enc.h.back(), enc.m));
        enc.policy.push_back(policy_forward(p.policy, enc.states.back()));
        enc.probs.push_back(enc.policy.back().prob);
    }
    return enc;
}

UpdatedRows apply_updates(const ActionSet& actions, std::span<const Vector> h, std::span<const Vector> rows_read,
                          std::span<const Vector> rows_retained, const UpdaterParams& p) {
    const std::size_t n = actions.size();
    UpdatedRows out;
    out.rows.resize(n);
    out.input.resize(n);
    out.pre.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!actions.actions[i]) {
            out.rows[i] = rows_retained[i];
            continue;
        }
        out.input[i] = concat(rows_read[i], h[i]);
        out.pre[i] = matvec(p.w_u.value, out.input[i]);
        out.rows[i] = relu(out.pre[i]);
    }
    return out;
}

LinkLoss link_loss(std::span<const double> x_s, std::span<const double> x_d, std::span<const double> x_n) {
    const double pos = dot(x_s, x_d);
    const double neg = dot(x_s, x_n);
    LinkLoss l;
    l.loss = softplus_neg(pos) + softplus_neg(1.0 - neg);
    const double g_pos = sigmoid(pos) - 1.0;
    const double g_neg = sigmoid(neg - 1.0);
    const std::size_t d = x_s.size();
    l.g_s.assign(d, 0.0);
    l.g_d.assign(d, 0.0);
    l.g_n.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        l.g_s[i] = g_pos * x_d[i] + g_neg * x_n[i];
        l.g_d[i] = g_pos * x_s[i];
        l.g_n[i] = g_neg * x_s[i];
    }
    return l;
}

void event_backward(ModelParams& p, std::span<const Vector> rows, const Neighborhood& nb,
                    const EventEncoding& enc, const DropoutMasks& masks, const ActionSet& actions,
                    const UpdatedRows& updated, const LinkLoss& loss, std::vector<Vector>* g_rows,
                    std::span<const Vector> agg_rows) {
    const std::size_t n = nb.size();
    const std::size_t d = p.d;
    const std::size_t dm = p.d_m();

    std::vector<Vector> g_after(n);
    auto add = [&](std::size_t pos, const Vector& g) {
        if (g_after[pos].empty()) g_after[pos].assign(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) g_after[pos][i] += g[i];
    };
    add(nb.src_pos, loss.g_s);
    add(nb.dst_pos, loss.g_d);

    std::vector<Vector> g_h(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (g_after[pos].empty()) continue;
        if (!actions.actions[pos]) {
            // retained row: the stored embedding passes straight through
            if (g_rows)
                for (std::size_t i = 0; i < d; ++i) (*g_rows)[pos][i] += g_after[pos][i];
            continue;
        }
        Vector g_pre(d, 0.0);
        relu_backward(updated.pre[pos], g_after[pos], g_pre);
        Vector g_input(d + dm, 0.0);
        matvec_backward(p.updater.w_u.value, updated.input[pos], g_pre, &p.updater.w_u.grad, g_input);
        if (g_rows)
            for (std::size_t i = 0; i < d; ++i) (*g_rows)[pos][i] += g_input[i];
        g_h[pos].assign(g_input.begin() + static_cast<std::ptrdiff_t>(d), g_input.end());
        if (!masks.h.empty())
            for (std::size_t c = 0; c < dm; ++c) g_h[pos][c] *= masks.h[pos][c];
    }

    Vector g_m(dm, 0.0);
    propagate_backward(p.agg, rows, enc.m, enc.pack, g_h, g_m, g_rows);
    if (!masks.message.empty())
        for (std::size_t c = 0; c < dm; ++c) g_m[c] *= masks.message[c];
    message_backward(p.agg, agg_rows.empty() ? rows : agg_rows, enc.message, g_m, g_rows);
}

double event_loss(const ModelParams& p, std::span<const Vector> rows, const Neighborhood& nb,
                  std::span<const double> edge_features, const EventOptions& opt, const DropoutMasks& masks,
                  const ActionSet& actions, std::span<const double> x_neg, std::span<const Vector> agg_rows) {
    auto enc = encode_event(p, rows, nb, edge_features, opt, masks, agg_rows);
    auto upd = apply_updates(actions, enc.h, rows, rows, p.updater);
    return link_loss(upd.rows[nb.src_pos], upd.rows[nb.dst_pos], x_neg).loss;
}

}  // namespace selprop

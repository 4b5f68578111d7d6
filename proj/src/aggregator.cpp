#include "aggregator.hpp"

#include <cmath>
#include <unordered_map>

namespace selprop {

TimeScale::Mode parse_time_scale_mode(const std::string& s) {
    if (s == "none") return TimeScale::Mode::none;
    if (s == "mean_gap") return TimeScale::Mode::mean_gap;
    if (s == "fixed") return TimeScale::Mode::fixed;
    throw Error("unknown time scale mode '" + s + "' (expected none, mean_gap or fixed)");
}

std::string to_string(TimeScale::Mode m) {
    switch (m) {
        case TimeScale::Mode::none: return "none";
        case TimeScale::Mode::mean_gap: return "mean_gap";
        case TimeScale::Mode::fixed: return "fixed";
    }
    return "none";
}

TimeScale make_time_scale(TimeScale::Mode mode, double fixed_value, const DatasetBundle& bundle) {
    TimeScale ts{mode, 1.0};
    if (mode == TimeScale::Mode::fixed) {
        if (!(fixed_value > 0.0)) throw Error("fixed time scale must be positive");
        ts.scale = fixed_value;
    } else if (mode == TimeScale::Mode::mean_gap && bundle.train_end >= 2) {
        const double span = bundle.events[bundle.train_end - 1].timestamp - bundle.events.front().timestamp;
        const double gap = span / static_cast<double>(bundle.train_end - 1);
        if (gap > 0.0) ts.scale = gap;
    }
    return ts;
}

double time_decay(double dt, const TimeScale& ts) {
    if (dt < 0.0) throw Error("time_decay: negative interval " + std::to_string(dt));
    const double scale = ts.mode == TimeScale::Mode::none ? 1.0 : ts.scale;
    return 1.0 / (1.0 + dt / scale);
}

AggregatorParams::AggregatorParams(std::size_t d_, std::size_t d_e_, SeededRng& rng)
    : d(d_), d_e(d_e_), w_g("W_g", d_, d_), a("a", 2 * d_, 1), w_p("W_p", d_, 2 * d_ + d_e_) {
    glorot_uniform(w_g.value, d, d, rng);
    glorot_uniform(a.value, 2 * d, 1, rng);
    glorot_uniform(w_p.value, d, d_m(), rng);
}

Neighborhood gather_neighborhood(const TemporalAdjacency& adj, const InteractionEvent& e, std::size_t k) {
    Neighborhood nb;
    nb.source = e.source;
    nb.destination = e.destination;
    nb.t = e.timestamp;

    std::unordered_map<NodeId, std::size_t> pos;
    auto slot = [&](NodeId n, double dt) {
        auto [it, fresh] = pos.emplace(n, nb.nodes.size());
        if (fresh) {
            nb.nodes.push_back(n);
            nb.delta_t.push_back(dt);
        } else if (dt < nb.delta_t[it->second]) {
            nb.delta_t[it->second] = dt;
        }
        return it->second;
    };
    nb.src_pos = slot(e.source, 0.0);
    nb.dst_pos = slot(e.destination, 0.0);

    auto fill = [&](NodeId center, std::vector<std::size_t>& members, std::vector<double>& dts,
                    std::vector<std::size_t>& star) {
        for (const auto& entry : adj.neighbors_at(center, e.timestamp, k, true)) {
            const double dt = e.timestamp - entry.timestamp;
            const std::size_t p = slot(entry.neighbor, dt);
            members.push_back(p);
            dts.push_back(dt);
        }
        star.assign(members.begin() + 1, members.end());
    };
    fill(e.source, nb.src_members, nb.src_dt, nb.src_star);
    fill(e.destination, nb.dst_members, nb.dst_dt, nb.dst_star);
    return nb;
}

CenterAggregate aggregate_message(const AggregatorParams& p, std::span<const Vector> rows, std::size_t center,
                                  std::span<const std::size_t> members, std::span<const double> dts,
                                  const TimeScale& ts, bool ablate_time) {
    if (members.empty()) throw Error("aggregate_message: empty neighborhood");
    const std::size_t d = p.d;
    CenterAggregate c;
    c.center = center;
    c.members.assign(members.begin(), members.end());
    c.center_proj = matvec(p.w_g.value, rows[center]);

    std::span<const double> a_center(p.a.value.values().data(), d);
    std::span<const double> a_neigh(p.a.value.values().data() + d, d);
    const double center_term = dot(a_center, c.center_proj);

    for (std::size_t j = 0; j < members.size(); ++j) {
        const double phi = ablate_time ? 1.0 : time_decay(dts[j], ts);
        c.decay.push_back(phi);
        c.proj.push_back(matvec(p.w_g.value, rows[members[j]]));
        c.pre.push_back(center_term + phi * dot(a_neigh, c.proj.back()));
    }
    c.alpha = softmax(relu(c.pre));
    c.pre_message.assign(d, 0.0);
    for (std::size_t j = 0; j < members.size(); ++j) {
        const double w = c.alpha[j] * c.decay[j];
        for (std::size_t i = 0; i < d; ++i) c.pre_message[i] += w * c.proj[j][i];
    }
    c.message = relu(c.pre_message);
    return c;
}

void aggregate_backward(AggregatorParams& p, std::span<const Vector> rows, const CenterAggregate& c,
                        std::span<const double> g_message, std::vector<Vector>* g_rows) {
    const std::size_t d = p.d;
    const std::size_t n = c.members.size();
    Vector g_pre_message(d, 0.0);
    relu_backward(c.pre_message, g_message, g_pre_message);

    // attention weights and the weighted projections
    Vector g_alpha(n, 0.0);
    std::vector<Vector> g_proj(n, Vector(d, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        g_alpha[j] = c.decay[j] * dot(g_pre_message, c.proj[j]);
        const double w = c.alpha[j] * c.decay[j];
        for (std::size_t i = 0; i < d; ++i) g_proj[j][i] += w * g_pre_message[i];
    }
    Vector g_logit(n, 0.0);
    softmax_backward(c.alpha, g_alpha, g_logit);
    Vector g_pre(n, 0.0);
    relu_backward(c.pre, g_logit, g_pre);

    std::span<const double> a_center(p.a.value.values().data(), d);
    std::span<const double> a_neigh(p.a.value.values().data() + d, d);
    auto g_a = p.a.grad.values();
    Vector g_center_proj(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (g_pre[j] == 0.0) continue;
        for (std::size_t i = 0; i < d; ++i) {
            g_a[i] += g_pre[j] * c.center_proj[i];
            g_a[d + i] += g_pre[j] * c.decay[j] * c.proj[j][i];
            g_center_proj[i] += g_pre[j] * a_center[i];
            g_proj[j][i] += g_pre[j] * c.decay[j] * a_neigh[i];
        }
    }

    auto row_grad = [&](std::size_t pos) -> std::span<double> {
        return g_rows ? std::span<double>((*g_rows)[pos]) : std::span<double>{};
    };
    matvec_backward(p.w_g.value, rows[c.center], g_center_proj, &p.w_g.grad, row_grad(c.center));
    for (std::size_t j = 0; j < n; ++j)
        matvec_backward(p.w_g.value, rows[c.members[j]], g_proj[j], &p.w_g.grad, row_grad(c.members[j]));
}

MessageForward build_interaction_message(const AggregatorParams& p, std::span<const Vector> rows,
                                         const Neighborhood& nb, std::span<const double> edge_features,
                                         const TimeScale& ts, bool ablate_time) {
    if (edge_features.size() != p.d_e)
        throw ShapeError("build_interaction_message: edge features (" + std::to_string(edge_features.size()) +
                         ") vs d_e (" + std::to_string(p.d_e) + ")");
    MessageForward f;
    f.src = aggregate_message(p, rows, nb.src_pos, nb.src_members, nb.src_dt, ts, ablate_time);
    f.dst = aggregate_message(p, rows, nb.dst_pos, nb.dst_members, nb.dst_dt, ts, ablate_time);
    f.message.d_g = p.d;
    f.message.d_e = p.d_e;
    f.message.m = concat(f.src.message, f.dst.message);
    f.message.m.insert(f.message.m.end(), edge_features.begin(), edge_features.end());
    return f;
}

void message_backward(AggregatorParams& p, std::span<const Vector> rows, const MessageForward& f,
                      std::span<const double> g_m, std::vector<Vector>* g_rows) {
    const std::size_t d = p.d;
    aggregate_backward(p, rows, f.src, g_m.subspan(0, d), g_rows);
    aggregate_backward(p, rows, f.dst, g_m.subspan(d, d), g_rows);
}

IntermediatePack propagate_intermediate(const AggregatorParams& p, std::span<const Vector> rows,
                                        std::span<const double> delta_t, std::span<const double> m,
                                        const TimeScale& ts, bool ablate_time) {
    if (m.size() != p.d_m())
        throw ShapeError("propagate_intermediate: message (" + std::to_string(m.size()) + ") vs d_m (" +
                         std::to_string(p.d_m()) + ")");
    IntermediatePack pack;
    const std::size_t n = delta_t.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double phi = ablate_time ? 1.0 : time_decay(delta_t[i], ts);
        pack.decay.push_back(phi);
        pack.proj.push_back(vecmat(rows[i], p.w_p.value));
        pack.score.push_back(phi * dot(pack.proj.back(), m));
    }
    pack.gate = sigmoid(pack.score);
    pack.beta = softmax(pack.gate);
    for (std::size_t i = 0; i < n; ++i) pack.h.push_back(scale(pack.proj[i], pack.beta[i] * pack.decay[i]));
    return pack;
}

void propagate_backward(AggregatorParams& p, std::span<const Vector> rows, std::span<const double> m,
                        const IntermediatePack& pack, std::span<const Vector> g_h, std::span<double> g_m,
                        std::vector<Vector>* g_rows) {
    const std::size_t n = pack.h.size();
    const std::size_t dm = p.d_m();
    std::vector<Vector> g_proj(n, Vector(dm, 0.0));
    Vector g_beta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (g_h[i].empty()) continue;
        g_beta[i] = pack.decay[i] * dot(g_h[i], pack.proj[i]);
        const double w = pack.beta[i] * pack.decay[i];
        for (std::size_t c = 0; c < dm; ++c) g_proj[i][c] += w * g_h[i][c];
    }
    Vector g_gate(n, 0.0);
    softmax_backward(pack.beta, g_beta, g_gate);
    Vector g_score(n, 0.0);
    sigmoid_backward(pack.gate, g_gate, g_score);
    for (std::size_t i = 0; i < n; ++i) {
        if (g_score[i] == 0.0) continue;
        const double w = g_score[i] * pack.decay[i];
        for (std::size_t c = 0; c < dm; ++c) {
            g_proj[i][c] += w * m[c];
            if (!g_m.empty()) g_m[c] += w * pack.proj[i][c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto gx = g_rows ? std::span<double>((*g_rows)[i]) : std::span<double>{};
        vecmat_backward(p.w_p.value, rows[i], g_proj[i], &p.w_p.grad, gx);
    }
}

}  // namespace selprop

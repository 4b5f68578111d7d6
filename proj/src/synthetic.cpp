#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace selprop {

void SyntheticSpec::validate() const {
    if (n_communities == 0 || nodes_per_community == 0) throw Error("synthetic: spec has no nodes");
    if (n_communities * nodes_per_community < 2) throw Error("synthetic: need at least two nodes");
    if (n_events == 0) throw Error("synthetic: spec has no events");
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string("synthetic: ") + name + " must be in [0, 1]");
    };
    prob(p_intra, "p_intra");
    prob(noisy_fraction, "noisy_fraction");
    prob(stale_fraction, "stale_fraction");
    prob(stale_horizon, "stale_horizon");
    if (activity_spread < 0.0) throw Error("synthetic: activity_spread must be non-negative");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    SeededRng rng(seed);
    const std::size_t n = spec.n_communities * spec.nodes_per_community;

    SyntheticData data;
    data.n_nodes = n;
    data.noisy.assign(n, false);
    std::vector<std::size_t> community(n);
    for (std::size_t v = 0; v < n; ++v) community[v] = v / spec.nodes_per_community;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(rng.next_u64()));
    const auto n_noisy = static_cast<std::size_t>(std::round(spec.noisy_fraction * static_cast<double>(n)));
    for (std::size_t i = 0; i < n_noisy; ++i) data.noisy[order[i]] = true;

    std::vector<double> activity(n, 1.0);
    if (spec.activity_spread > 0.0)
        for (auto& a : activity) a = std::exp(rng.normal(0.0, spec.activity_spread));

    auto pick_weighted = [&](auto&& eligible, std::size_t exclude) -> std::size_t {
        double total = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (v != exclude && eligible(v)) total += activity[v];
        if (total <= 0.0) return n;
        double u = rng.uniform() * total;
        std::size_t last = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (v == exclude || !eligible(v)) continue;
            last = v;
            u -= activity[v];
            if (u < 0.0) return v;
        }
        return last;
    };

    data.community_before = community;
    const auto horizon = static_cast<std::size_t>(std::floor(spec.stale_horizon * static_cast<double>(spec.n_events)));
    double t = 0.0;
    for (std::size_t i = 0; i < spec.n_events; ++i) {
        if (i == horizon && spec.n_communities > 1 && spec.stale_fraction > 0.0) {
            std::vector<std::size_t> movable;
            for (std::size_t v = 0; v < n; ++v)
                if (!data.noisy[v]) movable.push_back(v);
            std::shuffle(movable.begin(), movable.end(), std::mt19937_64(rng.next_u64()));
            const auto n_move =
                static_cast<std::size_t>(std::round(spec.stale_fraction * static_cast<double>(movable.size())));
            for (std::size_t j = 0; j < n_move; ++j) {
                const std::size_t shift = 1 + rng.index(spec.n_communities - 1);
                community[movable[j]] = (community[movable[j]] + shift) % spec.n_communities;
            }
        }
        t += -std::log(1.0 - rng.uniform());
        t = std::round(t * 1e6) / 1e6;

        const std::size_t src = pick_weighted([](std::size_t) { return true; }, n);
        std::size_t dst = n;
        if (data.noisy[src]) {
            dst = pick_weighted([](std::size_t) { return true; }, src);
        } else if (rng.bernoulli(spec.p_intra)) {
            dst = pick_weighted([&](std::size_t v) { return community[v] == community[src]; }, src);
        } else {
            dst = pick_weighted([&](std::size_t v) { return community[v] != community[src]; }, src);
        }
        if (dst == n) dst = pick_weighted([](std::size_t) { return true; }, src);
        data.events.push_back({static_cast<NodeId>(src), static_cast<NodeId>(dst), t, {}});
    }
    data.community_after = community;
    return data;
}

void write_edge_list(const std::vector<InteractionEvent>& events, std::ostream& out) {
    char buf[96];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%u %u %.6f\n", e.source, e.destination, e.timestamp);
        out << buf;
    }
}

DatasetBundle bundle_from_events(std::vector<InteractionEvent> events, std::size_t n_nodes, std::string name) {
    DatasetBundle b;
    b.name = std::move(name);
    b.n_nodes = n_nodes;
    b.d_e = events.empty() ? 0 : events.front().edge_features.size();
    std::stable_sort(events.begin(), events.end(),
                     [](const InteractionEvent& a, const InteractionEvent& c) { return a.timestamp < c.timestamp; });
    b.events = std::move(events);
    chronological_split(b);
    return b;
}

}  // namespace selprop

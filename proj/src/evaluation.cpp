#include "evaluation.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

namespace selprop {

std::size_t pessimistic_rank(std::span<const double> scores, std::size_t positive) {
    const double target = scores[positive];
    std::size_t rank = 1;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (i != positive && scores[i] >= target) ++rank;
    return rank;
}

double mean_reciprocal_rank(std::span<const std::size_t> ranks) {
    if (ranks.empty()) return 0.0;
    double s = 0.0;
    for (auto r : ranks) s += 1.0 / static_cast<double>(r);
    return s / static_cast<double>(ranks.size());
}

double average_precision(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty()) return 0.0;
    std::vector<std::pair<double, bool>> all;
    all.reserve(pos.size() + neg.size());
    for (double s : pos) all.emplace_back(s, true);
    for (double s : neg) all.emplace_back(s, false);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    std::size_t tp = 0, seen = 0;
    double sum = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        std::size_t group_pos = 0;
        while (j < all.size() && all[j].first == all[i].first) {
            group_pos += all[j].second ? 1 : 0;
            ++j;
        }
        tp += group_pos;
        seen += j - i;
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        for (std::size_t g = 0; g < group_pos; ++g) sum += precision;
        i = j;
    }
    return sum / static_cast<double>(pos.size());
}

double roc_auc(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty()) return 0.0;
    std::vector<double> sorted(neg.begin(), neg.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t twice = 0;  // 2 * (#wins) + #ties
    for (double p : pos) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
        auto hi = std::upper_bound(lo, sorted.end(), p);
        twice += 2 * static_cast<std::uint64_t>(lo - sorted.begin()) + static_cast<std::uint64_t>(hi - lo);
    }
    return static_cast<double>(twice) / (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<bool> inductive_filter(const DatasetBundle& bundle, std::size_t begin, std::size_t end) {
    std::vector<bool> keep;
    keep.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        const auto& e = bundle.events[i];
        keep.push_back(bundle.is_inductive(e.source) || bundle.is_inductive(e.destination));
    }
    return keep;
}

EvalMode parse_eval_mode(const std::string& s) {
    if (s == "transductive") return EvalMode::transductive;
    if (s == "inductive") return EvalMode::inductive;
    throw Error("unknown mode '" + s + "' (expected transductive or inductive)");
}

std::string to_string(EvalMode m) { return m == EvalMode::inductive ? "inductive" : "transductive"; }

MetricsReport evaluate_stream(ModelState& state, const DatasetBundle& bundle, std::size_t begin, std::size_t end,
                              const TrainConfig& cfg, const StreamSettings& settings) {
    MetricsReport report;
    report.mode = settings.mode;
    const auto keep = settings.mode == EvalMode::inductive ? inductive_filter(bundle, begin, end)
                                                           : std::vector<bool>(end - begin, true);

    const NegativeSampler sampler(bundle, cfg.negative_scope);
    SeededRng neg_rng = SeededRng::derive(cfg.seed, settings.negative_stream);
    SeededRng noise_rng = SeededRng::derive(cfg.seed, 6);
    SeededRng action_rng = SeededRng::derive(cfg.seed, 7);

    StepContext ctx;
    ctx.learn = false;
    ctx.noise_sigma2 = settings.noise_sigma2;
    ctx.noise_rng = &noise_rng;
    ctx.action_rng = &action_rng;
    ctx.action_log = settings.action_log;

    std::vector<double> pos_scores, neg_scores;
    std::vector<double> cand;
    std::size_t nodes = 0, updated = 0, neigh = 0, neigh_updated = 0;

    for (std::size_t i = begin; i < end; ++i) {
        const auto& e = bundle.events[i];
        if (keep[i - begin]) {
            const auto xs = state.table.row(e.source);
            if (settings.compute_mrr) {
                cand.clear();
                std::size_t positive = 0;
                for (NodeId v = 0; v < bundle.n_nodes; ++v) {
                    if (v == e.source && v != e.destination) continue;
                    if (v == e.destination) positive = cand.size();
                    cand.push_back(cosine_similarity(xs, state.table.row(v)));
                }
                report.ranks.push_back(pessimistic_rank(cand, positive));
            }
            const NodeId neg = sampler.sample(neg_rng, e.destination);
            pos_scores.push_back(sigmoid(dot(xs, state.table.row(e.destination))));
            neg_scores.push_back(sigmoid(dot(xs, state.table.row(neg))));
        }
        ctx.event_index = i;
        const auto out = process_event(state, e, cfg, ctx);
        nodes += out.nodes;
        updated += out.updated;
        neigh += out.neighbor_nodes;
        neigh_updated += out.neighbor_updated;
    }

    report.n_edges = pos_scores.size();
    report.update_rate = nodes ? static_cast<double>(updated) / static_cast<double>(nodes) : 0.0;
    report.neighbor_update_rate = neigh ? static_cast<double>(neigh_updated) / static_cast<double>(neigh) : 0.0;
    if (report.n_edges == 0) {
        if (end > begin)
            std::cerr << "warning: no " << to_string(settings.mode) << " edges in evaluation slice; metrics absent\n";
        return report;
    }
    if (settings.compute_mrr) report.mrr = mean_reciprocal_rank(report.ranks);
    report.ap = average_precision(pos_scores, neg_scores);
    report.auc = roc_auc(pos_scores, neg_scores);
    return report;
}

}  // namespace selprop

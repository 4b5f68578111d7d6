#pragma once

// Link-prediction metrics (MRR over all nodes, AP/AUC with one negative
// per edge) computed while streaming the model through held-out events.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "engine.hpp"

namespace selprop {

/// 1 + number of other candidates scoring >= the positive (ties go against
/// the positive). `scores` covers all candidates, `positive` indexes it.
std::size_t pessimistic_rank(std::span<const double> scores, std::size_t positive);

double mean_reciprocal_rank(std::span<const std::size_t> ranks);

/// Step-wise average precision with tied scores grouped into one threshold.
double average_precision(std::span<const double> pos, std::span<const double> neg);

/// P(pos > neg) + 0.5 P(pos == neg), exact.
double roc_auc(std::span<const double> pos, std::span<const double> neg);

/// Per-event mask over [begin, end): true when an endpoint is an inductive node.
std::vector<bool> inductive_filter(const DatasetBundle& bundle, std::size_t begin, std::size_t end);

enum class EvalMode { transductive, inductive };
EvalMode parse_eval_mode(const std::string& s);
std::string to_string(EvalMode m);

struct MetricsReport {
    std::optional<double> mrr;
    std::optional<double> ap;
    std::optional<double> auc;
    EvalMode mode = EvalMode::transductive;
    std::size_t n_edges = 0;
    double update_rate = 0.0;           // over every node offered to the selector
    double neighbor_update_rate = 0.0;  // over non-center nodes only
    std::vector<std::size_t> ranks;
};

struct StreamSettings {
    EvalMode mode = EvalMode::transductive;
    double noise_sigma2 = 0.0;
    bool compute_mrr = true;
    std::uint64_t negative_stream = 5;  // RNG tag for AP/AUC negatives
    std::vector<ActionLogRow>* action_log = nullptr;
};

/// Scores, then processes (frozen parameters, deterministic actions) every
/// event in [begin, end). Parameters are never modified; the table and
/// adjacency advance.
MetricsReport evaluate_stream(ModelState& state, const DatasetBundle& bundle, std::size_t begin, std::size_t end,
                              const TrainConfig& cfg, const StreamSettings& settings);

}  // namespace selprop

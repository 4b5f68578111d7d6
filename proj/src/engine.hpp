#pragma once

// Streaming state and the per-event step shared by training and
// evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include "aggregator.hpp"
#include "graph_store.hpp"
#include "model.hpp"

namespace selprop {

enum class SelectionStrategy { learned, all, none, random };
enum class NegativeScope { automatic, all_nodes, destination_partition };

SelectionStrategy parse_selection_strategy(const std::string& s);
std::string to_string(SelectionStrategy s);
NegativeScope parse_negative_scope(const std::string& s);
std::string to_string(NegativeScope s);

struct TrainConfig {
    std::size_t d = 32;
    std::size_t d_h = 64;
    std::size_t k = 200;
    double lr = 1e-4;
    double policy_lr = 0.0;  // 0: same as lr
    double dropout = 0.5;
    std::size_t patience = 10;
    std::size_t max_epochs = 50;
    std::uint64_t seed = 0;
    TimeScale::Mode time_scale = TimeScale::Mode::mean_gap;
    double time_scale_value = 1.0;
    SelectionStrategy strategy = SelectionStrategy::learned;
    bool ablate_agg_time = false;
    bool ablate_prop_time = false;
    NegativeScope negative_scope = NegativeScope::automatic;
    bool persist_embeddings = false;  // keep the table across epochs instead of resetting it
    double train_noise_sigma2 = 0.0;  // neighbor-read noise during training
    double grad_clip = 0.0;           // max gradient L2 norm per parameter; 0 disables

    void validate() const;
    double effective_policy_lr() const { return policy_lr > 0.0 ? policy_lr : lr; }
};

struct ModelState {
    ModelParams params;
    EmbeddingTable table;
    TemporalAdjacency adj;
    TimeScale time_scale;
    std::size_t cursor = 0;  // events consumed from the bundle
};

EmbeddingTable initial_embeddings(const DatasetBundle& bundle, const TrainConfig& cfg);
ModelState init_model_state(const DatasetBundle& bundle, const TrainConfig& cfg);
/// Fresh table and empty adjacency, parameters untouched.
void reset_stream(ModelState& state, const DatasetBundle& bundle, const TrainConfig& cfg);

class NegativeSampler {
public:
    NegativeSampler(const DatasetBundle& bundle, NegativeScope scope);
    /// Uniform node from the scope, resampled once it equals `avoid` (when the scope has more than one node).
    NodeId sample(SeededRng& rng, NodeId avoid) const;

private:
    NodeId lo_ = 0;
    NodeId hi_ = 0;  // exclusive
};

struct ActionLogRow {
    std::size_t event_index = 0;
    NodeId node = 0;
    double pi = 0.0;
    int action = 0;
    double noise_sigma2 = 0.0;
};

struct EventOutcome {
    double loss = 0.0;
    double reward = 0.0;
    double reward_baseline = 0.0;
    std::size_t nodes = 0;
    std::size_t updated = 0;
    std::size_t neighbor_nodes = 0;
    std::size_t neighbor_updated = 0;
    bool policy_stepped = false;
};

struct StepContext {
    bool learn = false;
    double noise_sigma2 = 0.0;
    SeededRng* action_rng = nullptr;    // sampling, random strategy, dropout
    SeededRng* negative_rng = nullptr;  // training negatives
    SeededRng* noise_rng = nullptr;     // neighbor-read noise
    const NegativeSampler* negatives = nullptr;
    std::vector<ActionLogRow>* action_log = nullptr;
    std::size_t event_index = 0;
};

/// Consumes one event: encode, act, (optionally) learn, commit the
/// updated rows and insert the event into the adjacency.
EventOutcome process_event(ModelState& state, const InteractionEvent& e, const TrainConfig& cfg, StepContext& ctx);

}  // namespace selprop

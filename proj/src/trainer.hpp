#pragma once

#include <functional>
#include <vector>

#include "engine.hpp"
#include "evaluation.hpp"

namespace selprop {

struct EpochReport {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double mean_reward = 0.0;
    double val_metric = 0.0;  // validation AP
    double update_rate = 0.0;
    std::size_t policy_steps = 0;

    bool operator==(const EpochReport&) const = default;
};

/// RNG streams consumed by training: action sampling plus dropout, and negatives.
struct TrainStreams {
    SeededRng action;
    SeededRng negative;

    static TrainStreams from_seed(std::uint64_t seed) {
        return {SeededRng::derive(seed, 3), SeededRng::derive(seed, 8)};
    }
};

/// One online pass over the training slice (the state must be at cursor 0).
EpochReport train_epoch(const DatasetBundle& bundle, ModelState& state, const TrainConfig& cfg,
                        TrainStreams& streams);

/// Patience rule: the first epoch is always the best so far, later ones
/// must beat it strictly.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    /// Records an epoch's validation metric; true when it is the new best.
    bool observe(double metric);
    bool should_stop() const { return bad_epochs_ >= patience_; }
    double best() const { return best_; }

private:
    std::size_t patience_;
    std::size_t seen_ = 0;
    std::size_t bad_epochs_ = 0;
    double best_ = 0.0;
};

struct FitResult {
    ModelState best;  // parameters and stream state right after the best validation pass
    std::vector<EpochReport> history;
    std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

/// Epoch loop with per-epoch stream reset, validation AP and early stopping.
FitResult fit(const DatasetBundle& bundle, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace selprop

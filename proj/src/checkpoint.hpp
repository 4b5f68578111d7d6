#pragma once

// JSON checkpoints: parameters with optimizer state, the embedding table
// and the stream cursor. The adjacency is rebuilt by replaying events.

#include <string>

#include "engine.hpp"

namespace selprop {

struct CheckpointInfo {
    std::string config_hash;
    std::uint64_t seed = 0;
};

void save_checkpoint(const std::string& path, const ModelState& state, const CheckpointInfo& info);

/// Restores a state for `bundle`; throws when dimensions or node counts disagree.
ModelState load_checkpoint(const std::string& path, const DatasetBundle& bundle, CheckpointInfo* info = nullptr);

}  // namespace selprop

#pragma once

// Community-structured interaction streams for desk-scale experiments.
// Noisy nodes pick partners uniformly at random; at the stale horizon a
// fraction of ordinary nodes migrates to another community, so their
// earlier links go out of date.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "graph_store.hpp"

namespace selprop {

struct SyntheticSpec {
    std::size_t n_communities = 4;
    std::size_t nodes_per_community = 25;
    std::size_t n_events = 2000;
    double p_intra = 0.9;
    double noisy_fraction = 0.1;
    double stale_fraction = 0.2;
    double stale_horizon = 0.5;  // position in the stream (0..1) where migration happens
    double activity_spread = 1.0; // stddev of log activity weights; 0 = uniform sources

    void validate() const;
};

struct SyntheticData {
    std::vector<InteractionEvent> events;
    std::vector<std::size_t> community_before;  // membership before the horizon
    std::vector<std::size_t> community_after;
    std::vector<bool> noisy;
    std::size_t n_nodes = 0;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes the edge_list format (`src dst timestamp`, one event per line).
void write_edge_list(const std::vector<InteractionEvent>& events, std::ostream& out);

/// In-memory bundle with node ids already dense, split 80/10/10.
DatasetBundle bundle_from_events(std::vector<InteractionEvent> events, std::size_t n_nodes, std::string name = {});

}  // namespace selprop

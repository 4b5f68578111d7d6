#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace selprop {

using NodeId = std::uint32_t;

struct InteractionEvent {
    NodeId source = 0;
    NodeId destination = 0;
    double timestamp = 0.0;
    Vector edge_features;

    bool operator==(const InteractionEvent&) const = default;
};

struct NeighborEntry {
    NodeId neighbor = 0;
    double timestamp = 0.0;

    bool operator==(const NeighborEntry&) const = default;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(what + (row ? " (row " + std::to_string(row) + ")" : std::string{})), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class OrderError : public Error {
public:
    using Error::Error;
};

/// Per-node interaction history, each list sorted by timestamp. Edges are
/// undirected for neighborhood purposes and repeated interactions are kept.
class TemporalAdjacency {
public:
    TemporalAdjacency() = default;
    explicit TemporalAdjacency(std::size_t n_nodes) : lists_(n_nodes) {}

    /// Appends each endpoint to the other's list. Rejects timestamps older
    /// than the last insert.
    void insert_event(const InteractionEvent& e);

    /// Up to k entries with timestamp < t, most recent first. With
    /// include_self the node itself is prepended at time t.
    std::vector<NeighborEntry> neighbors_at(NodeId node, double t, std::size_t k, bool include_self) const;

    std::size_t n_nodes() const { return lists_.size(); }
    std::size_t total_entries() const;
    std::size_t events_inserted() const { return events_inserted_; }
    double last_timestamp() const { return last_timestamp_; }
    const std::vector<NeighborEntry>& history(NodeId node) const { return lists_.at(node); }

    void reset();

private:
    std::vector<std::vector<NeighborEntry>> lists_;
    std::size_t events_inserted_ = 0;
    double last_timestamp_ = 0.0;
};

enum class DatasetFormat { jodie_csv, edge_list };

DatasetFormat parse_dataset_format(const std::string& s);
std::string to_string(DatasetFormat f);

struct DatasetBundle {
    std::string name;
    std::vector<InteractionEvent> events;
    std::size_t n_nodes = 0;
    std::size_t d_e = 0;
    std::optional<Tensor> raw_node_features;
    /// Bipartite datasets put the second partition at ids >= first_partition_size.
    bool bipartite = false;
    std::size_t first_partition_size = 0;

    std::size_t train_end = 0;
    std::size_t val_end = 0;
    std::vector<bool> inductive;  // per node; true when absent from the training slice

    bool is_inductive(NodeId n) const { return n < inductive.size() && inductive[n]; }
    std::size_t inductive_count() const;
};

DatasetBundle parse_dataset(std::istream& in, DatasetFormat format, std::string name = {});
DatasetBundle load_dataset(const std::string& path, DatasetFormat format);

/// Dense node-feature matrix: one row per node id, comma separated.
Tensor load_node_features(const std::string& path, std::size_t n_nodes);

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

/// Sets contiguous chronological train/val/test boundaries and the
/// inductive node set.
void chronological_split(DatasetBundle& bundle, SplitRatios ratios = {});

}  // namespace selprop

#pragma once

// Embedding table, update/retain rule, link-prediction loss and the
// per-event forward/backward pass that ties the aggregator, the policy
// and the updater together.

#include <cstdint>
#include <span>
#include <vector>

#include "aggregator.hpp"
#include "graph_store.hpp"
#include "numerics.hpp"
#include "policy.hpp"

namespace selprop {

struct EmbeddingTable {
    Tensor x;                         // n x d
    std::vector<double> last_update;  // per node, -1 before the first update

    EmbeddingTable() = default;
    EmbeddingTable(std::size_t n, std::size_t d) : x(n, d), last_update(n, -1.0) {}

    std::size_t n_nodes() const { return x.rows(); }
    std::size_t dim() const { return x.cols(); }
    std::span<const double> row(NodeId n) const { return x.row(n); }

    bool operator==(const EmbeddingTable&) const = default;
};

/// Seeded Glorot-uniform rows (fan_in = fan_out = d, so rows have roughly unit norm).
EmbeddingTable random_embeddings(std::size_t n, std::size_t d, SeededRng& rng);
/// Raw node features copied row by row, zero-padded or truncated to d.
EmbeddingTable feature_embeddings(const Tensor& features, std::size_t d);

struct UpdaterParams {
    std::size_t d = 0;
    std::size_t d_m = 0;
    Parameter w_u;  // d x (d + d_m)

    UpdaterParams() = default;
    UpdaterParams(std::size_t d, std::size_t d_m, SeededRng& rng);
};

struct ModelParams {
    std::size_t d = 0;
    std::size_t d_e = 0;
    std::size_t d_h = 0;
    AggregatorParams agg;
    PolicyParams policy;
    UpdaterParams updater;

    ModelParams() = default;
    ModelParams(std::size_t d, std::size_t d_e, std::size_t d_h, std::uint64_t seed);

    std::size_t d_m() const { return 2 * d + d_e; }

    /// Aggregator and updater parameters, trained by the link loss.
    std::vector<Parameter*> supervised();
    std::vector<Parameter*> policy_params();
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
};

struct DropoutMasks {
    Vector message;          // empty: identity
    std::vector<Vector> h;   // per position, empty: identity
};

/// Inverted-dropout masks (entries 0 or 1/(1-rate)); rate 0 yields identities.
DropoutMasks draw_dropout(double rate, std::size_t positions, std::size_t d_m, SeededRng& rng);

struct EventOptions {
    TimeScale time_scale;
    bool ablate_agg_time = false;
    bool ablate_prop_time = false;
};

/// Everything computed for one event before actions are chosen.
struct EventEncoding {
    MessageForward message;
    Vector m;                   // message after dropout
    IntermediatePack pack;
    std::vector<Vector> h;      // intermediate embeddings after dropout
    std::vector<Vector> states; // h_i || m
    std::vector<PolicyEval> policy;
    std::vector<double> probs;
};

/// `agg_rows` are the reads seen by the neighborhood aggregation (they
/// differ from `rows` only under injected noise); empty means `rows`.
EventEncoding encode_event(const ModelParams& p, std::span<const Vector> rows, const Neighborhood& nb,
                           std::span<const double> edge_features, const EventOptions& opt,
                           const DropoutMasks& masks, std::span<const Vector> agg_rows = {});

/// Post-action embeddings for every neighborhood position.
struct UpdatedRows {
    std::vector<Vector> rows;
    std::vector<Vector> input;  // x_i || h_i for updated positions
    std::vector<Vector> pre;    // W_u (x_i || h_i) for updated positions
};

/// a_i = 1: relu(W_u (x_i || h_i)) from the read row; a_i = 0: the retained row.
UpdatedRows apply_updates(const ActionSet& actions, std::span<const Vector> h, std::span<const Vector> rows_read,
                          std::span<const Vector> rows_retained, const UpdaterParams& p);

struct LinkLoss {
    double loss = 0.0;
    Vector g_s;
    Vector g_d;
    Vector g_n;
};

/// -log sigmoid(x_s . x_d) - log sigmoid(1 - x_s . x_n) with input gradients.
LinkLoss link_loss(std::span<const double> x_s, std::span<const double> x_d, std::span<const double> x_n);

/// Backpropagates the link loss of an encoded event into the supervised
/// parameter gradients. When g_rows is given, gradients with respect to
/// the read rows are accumulated there as well.
void event_backward(ModelParams& p, std::span<const Vector> rows, const Neighborhood& nb,
                    const EventEncoding& enc, const DropoutMasks& masks, const ActionSet& actions,
                    const UpdatedRows& updated, const LinkLoss& loss, std::vector<Vector>* g_rows,
                    std::span<const Vector> agg_rows = {});

/// Loss of an event for fixed masks and actions; the gradient-check target.
double event_loss(const ModelParams& p, std::span<const Vector> rows, const Neighborhood& nb,
                  std::span<const double> edge_features, const EventOptions& opt, const DropoutMasks& masks,
                  const ActionSet& actions, std::span<const double> x_neg, std::span<const Vector> agg_rows = {});

}  // namespace selprop

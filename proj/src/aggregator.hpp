#pragma once

// Time-aware attention: the per-center neighborhood message, the
// interaction message m = m_s || m_d || e, and per-node intermediate
// embeddings h_i over the union neighborhood.

#include <span>
#include <vector>

#include "graph_store.hpp"
#include "numerics.hpp"

namespace selprop {

struct TimeScale {
    enum class Mode { none, mean_gap, fixed };
    Mode mode = Mode::none;
    double scale = 1.0;
};

TimeScale::Mode parse_time_scale_mode(const std::string& s);
std::string to_string(TimeScale::Mode m);

/// Resolves the scale: none -> 1, fixed -> value, mean_gap -> mean
/// inter-event gap of the training slice (1 when degenerate).
TimeScale make_time_scale(TimeScale::Mode mode, double fixed_value, const DatasetBundle& bundle);

/// 1 / (1 + dt / scale). Throws on negative dt.
double time_decay(double dt, const TimeScale& ts);

struct AggregatorParams {
    std::size_t d = 0;    // embedding dim (= attention dim)
    std::size_t d_e = 0;  // edge feature dim
    Parameter w_g;        // d x d
    Parameter a;          // 2d x 1
    Parameter w_p;        // d x d_m

    AggregatorParams() = default;
    AggregatorParams(std::size_t d, std::size_t d_e, SeededRng& rng);

    std::size_t d_m() const { return 2 * d + d_e; }
};

/// Event-local neighborhood. Every node touched by the event gets one
/// position in `nodes`; the other vectors index into it.
struct Neighborhood {
    NodeId source = 0;
    NodeId destination = 0;
    double t = 0.0;

    std::vector<NodeId> nodes;   // N_{s u d}(t), distinct, source first
    std::vector<double> delta_t; // smallest dt to either center
    std::size_t src_pos = 0;
    std::size_t dst_pos = 0;

    // N_s(t), N_d(t) with the self entry first (one entry per interaction)
    std::vector<std::size_t> src_members;
    std::vector<double> src_dt;
    std::vector<std::size_t> dst_members;
    std::vector<double> dst_dt;

    // N*_s(t), N*_d(t): the same lists without the self entry
    std::vector<std::size_t> src_star;
    std::vector<std::size_t> dst_star;

    std::size_t size() const { return nodes.size(); }
    bool is_center(std::size_t pos) const { return pos == src_pos || pos == dst_pos; }
};

Neighborhood gather_neighborhood(const TemporalAdjacency& adj, const InteractionEvent& e, std::size_t k);

/// Forward cache for one center's attention aggregation.
struct CenterAggregate {
    std::size_t center = 0;
    std::vector<std::size_t> members;
    std::vector<double> decay;
    Vector center_proj;            // W_g x_c
    std::vector<Vector> proj;      // W_g x_j
    std::vector<double> pre;       // a^T [W_g x_c || phi_j W_g x_j]
    std::vector<double> alpha;
    Vector pre_message;            // sum_j alpha_j phi_j W_g x_j
    Vector message;                // relu(pre_message)
};

/// `rows` holds the embedding read for each neighborhood position.
CenterAggregate aggregate_message(const AggregatorParams& p, std::span<const Vector> rows, std::size_t center,
                                  std::span<const std::size_t> members, std::span<const double> dts,
                                  const TimeScale& ts, bool ablate_time);

/// Accumulates into p.w_g.grad, p.a.grad and (optionally) per-row input gradients.
void aggregate_backward(AggregatorParams& p, std::span<const Vector> rows, const CenterAggregate& c,
                        std::span<const double> g_message, std::vector<Vector>* g_rows);

struct InteractionMessage {
    Vector m;
    std::size_t d_g = 0;
    std::size_t d_e = 0;

    std::span<const double> m_s() const { return {m.data(), d_g}; }
    std::span<const double> m_d() const { return {m.data() + d_g, d_g}; }
    std::span<const double> edge() const { return {m.data() + 2 * d_g, d_e}; }
};

struct MessageForward {
    CenterAggregate src;
    CenterAggregate dst;
    InteractionMessage message;
};

MessageForward build_interaction_message(const AggregatorParams& p, std::span<const Vector> rows,
                                         const Neighborhood& nb, std::span<const double> edge_features,
                                         const TimeScale& ts, bool ablate_time);

void message_backward(AggregatorParams& p, std::span<const Vector> rows, const MessageForward& f,
                      std::span<const double> g_m, std::vector<Vector>* g_rows);

/// Intermediate embeddings for every neighborhood position.
struct IntermediatePack {
    std::vector<double> decay;
    std::vector<Vector> proj;     // x_i^T W_p
    std::vector<double> score;    // phi_i x_i^T W_p m
    std::vector<double> gate;     // sigmoid(score)
    std::vector<double> beta;     // softmax over gates
    std::vector<Vector> h;        // beta_i phi_i x_i^T W_p
};

IntermediatePack propagate_intermediate(const AggregatorParams& p, std::span<const Vector> rows,
                                        std::span<const double> delta_t, std::span<const double> m,
                                        const TimeScale& ts, bool ablate_time);

/// Backward from per-node gradients on h (entries may be empty = zero).
void propagate_backward(AggregatorParams& p, std::span<const Vector> rows, std::span<const double> m,
                        const IntermediatePack& pack, std::span<const Vector> g_h, std::span<double> g_m,
                        std::vector<Vector>* g_rows);

}  // namespace selprop

#pragma once
// Factor graph over recommendation behaviors. Node and edge factors follow
// the log-linear form: the unnormalized log-weight of a full labeling Y is
// phi . S(Y) with S = (s_f, s_g, s_h, s_edge). The semi-supervised
// objective is the clamped log-partition minus the free log-partition.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fgrec/features.hpp"
#include "fgrec/influence.hpp"

namespace fgrec {

struct Params {
    double alpha = 0.5;
    double beta = 0.5;
    double gamma = 0.5;
    double lambda = 0.5;

    std::array<double, 4> as_array() const { return {alpha, beta, gamma, lambda}; }
    static Params from_array(const std::array<double, 4>& a) {
        return Params{a[0], a[1], a[2], a[3]};
    }
};

// Label convention: +1 like, -1 dislike, 0 unknown (free).
struct BehaviorNode {
    std::uint32_t user = 0;
    std::uint32_t item = 0;
    NodeDistances distances;
    std::int8_t label = 0;
};

struct SufficientStats {
    double s_f = 0.0;
    double s_g = 0.0;
    double s_h = 0.0;
    double s_edge = 0.0;

    double dot(const Params& p) const {
        return p.alpha * s_f + p.beta * s_g + p.gamma * s_h + p.lambda * s_edge;
    }
    std::array<double, 4> as_array() const { return {s_f, s_g, s_h, s_edge}; }
    SufficientStats& operator+=(const SufficientStats& o) {
        s_f += o.s_f;
        s_g += o.s_g;
        s_h += o.s_h;
        s_edge += o.s_edge;
        return *this;
    }
};

struct Component {
    std::vector<std::uint32_t> nodes;
    std::vector<std::uint32_t> edges;
};

class FactorGraph {
public:
    FactorGraph() = default;
    FactorGraph(std::vector<BehaviorNode> nodes, std::vector<Edge> edges, Params params = {});

    const std::vector<BehaviorNode>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Params& params() const { return params_; }
    void set_params(const Params& p) { params_ = p; }

    std::size_t size() const { return nodes_.size(); }
    std::size_t clamped_count() const { return clamped_count_; }
    std::size_t unknown_count() const { return nodes_.size() - clamped_count_; }

    // Edge indices incident to a node.
    std::span<const std::uint32_t> incident_edges(std::uint32_t node) const;
    const std::vector<Component>& components() const { return components_; }
    std::size_t max_component_size() const { return max_component_size_; }

private:
    std::vector<BehaviorNode> nodes_;
    std::vector<Edge> edges_;
    Params params_;
    std::vector<std::uint32_t> adj_offsets_;
    std::vector<std::uint32_t> adj_edges_;
    std::vector<Component> components_;
    std::size_t clamped_count_ = 0;
    std::size_t max_component_size_ = 0;
};

// alpha*(-y*d_U) + beta*(-y*d_TP) + gamma*(-y*d_KW)
double node_log_potential(const BehaviorNode& node, int y, const Params& params);

// lambda*(-(y_a - y_b)^2): 0 on agreement, -4*lambda on disagreement.
double edge_log_potential(int y_a, int y_b, const Params& params);

// Aggregated statistics of a full labeling (every entry must be +1 or -1).
SufficientStats sufficient_stats(const FactorGraph& graph, std::span<const std::int8_t> labels);

// Exact enumeration is limited to this many free variables per component.
constexpr std::size_t kMaxExactFreeVars = 20;

struct ExactResult {
    double log_z = 0.0;
    SufficientStats expected;
    // P(y=+1) for every node (clamped nodes report their clamp).
    std::vector<double> p_pos;
};

// Exhaustive per-component enumeration of the clamped (Y^K fixed) or free
// distribution. Throws when a component exceeds kMaxExactFreeVars free
// variables, directing the caller to the approximate engine.
ExactResult exact_inference(const FactorGraph& graph, const Params& params, bool clamped);

// Clamped minus free log-partition (exact; same size cap as above).
double log_likelihood(const FactorGraph& graph, const Params& params);

// d Omega / d phi = E[S | clamped] - E[S] (exact).
std::array<double, 4> gradient(const FactorGraph& graph, const Params& params);

}  // namespace fgrec

#include "fgrec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fgrec {

FactorGraph::FactorGraph(std::vector<BehaviorNode> nodes, std::vector<Edge> edges, Params params)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), params_(params) {
    const std::size_t n = nodes_.size();
    for (const auto& e : edges_) {
        if (e.node_a >= n || e.node_b >= n || e.node_a == e.node_b) {
            throw std::invalid_argument("FactorGraph: edge endpoints out of range");
        }
    }
    for (const auto& node : nodes_) {
        if (node.label != 0) ++clamped_count_;
    }

    // CSR adjacency.
    adj_offsets_.assign(n + 1, 0);
    for (const auto& e : edges_) {
        ++adj_offsets_[e.node_a + 1];
        ++adj_offsets_[e.node_b + 1];
    }
    for (std::size_t i = 1; i <= n; ++i) adj_offsets_[i] += adj_offsets_[i - 1];
    adj_edges_.resize(adj_offsets_[n]);
    std::vector<std::uint32_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
    for (std::uint32_t ei = 0; ei < edges_.size(); ++ei) {
        adj_edges_[cursor[edges_[ei].node_a]++] = ei;
        adj_edges_[cursor[edges_[ei].node_b]++] = ei;
    }

    // Connected components by BFS over the adjacency, in node order.
    std::vector<std::int32_t> comp_of(n, -1);
    std::vector<std::uint32_t> queue;
    for (std::uint32_t start = 0; start < n; ++start) {
        if (comp_of[start] >= 0) continue;
        const auto comp_id = static_cast<std::int32_t>(components_.size());
        components_.emplace_back();
        Component& comp = components_.back();
        queue.assign(1, start);
        comp_of[start] = comp_id;
        while (!queue.empty()) {
            std::uint32_t v = queue.back();
            queue.pop_back();
            comp.nodes.push_back(v);
            for (auto ei : incident_edges(v)) {
                const Edge& e = edges_[ei];
                std::uint32_t w = e.node_a == v ? e.node_b : e.node_a;
                if (comp_of[w] < 0) {
                    comp_of[w] = comp_id;
                    queue.push_back(w);
                }
            }
        }
        std::sort(comp.nodes.begin(), comp.nodes.end());
        max_component_size_ = std::max(max_component_size_, comp.nodes.size());
    }
    for (std::uint32_t ei = 0; ei < edges_.size(); ++ei) {
        components_[static_cast<std::size_t>(comp_of[edges_[ei].node_a])].edges.push_back(ei);
    }
}

std::span<const std::uint32_t> FactorGraph::incident_edges(std::uint32_t node) const {
    return std::span<const std::uint32_t>(adj_edges_.data() + adj_offsets_[node],
                                          adj_offsets_[node + 1] - adj_offsets_[node]);
}

double node_log_potential(const BehaviorNode& node, int y, const Params& params) {
    const double dy = static_cast<double>(y);
    return params.alpha * (-dy * node.distances.d_u) + params.beta * (-dy * node.distances.d_tp) +
           params.gamma * (-dy * node.distances.d_kw);
}

double edge_log_potential(int y_a, int y_b, const Params& params) {
    const double diff = static_cast<double>(y_a - y_b);
    return params.lambda * (-(diff * diff));
}

SufficientStats sufficient_stats(const FactorGraph& graph, std::span<const std::int8_t> labels) {
    if (labels.size() != graph.size()) {
        throw std::invalid_argument("sufficient_stats: labeling size mismatch");
    }
    SufficientStats s;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1 && labels[i] != -1) {
            throw std::invalid_argument("sufficient_stats: labeling must assign +1 or -1 to every node");
        }
        const double y = static_cast<double>(labels[i]);
        const NodeDistances& d = graph.nodes()[i].distances;
        s.s_f += -y * d.d_u;
        s.s_g += -y * d.d_tp;
        s.s_h += -y * d.d_kw;
    }
    for (const auto& e : graph.edges()) {
        const double diff = static_cast<double>(labels[e.node_a] - labels[e.node_b]);
        s.s_edge += -(diff * diff);
    }
    return s;
}

namespace {

struct ComponentStats {
    double log_z;
    SufficientStats expected;
    std::vector<double> p_pos;  // aligned with free node list
};

// Exhaustive enumeration of one component with the given free nodes; all
// other component nodes keep their clamped labels.
ComponentStats enumerate_component(const FactorGraph& graph, const Params& params,
                                   const Component& comp,
                                   const std::vector<std::uint32_t>& free_nodes) {
    const auto& nodes = graph.nodes();
    const auto& edges = graph.edges();
    const std::size_t f = free_nodes.size();
    if (f > kMaxExactFreeVars) {
        throw std::runtime_error(
            "exact inference: component has " + std::to_string(f) + " free variables (cap " +
            std::to_string(kMaxExactFreeVars) + "); use the approximate (lbp) engine");
    }

    // Current labeling; free nodes start at -1 (mask bit clear).
    std::vector<std::int8_t> y(graph.size(), 0);
    for (auto v : comp.nodes) y[v] = nodes[v].label != 0 ? nodes[v].label : -1;

    auto stats_of = [&]() {
        SufficientStats s;
        for (auto v : comp.nodes) {
            const double yy = static_cast<double>(y[v]);
            const NodeDistances& d = nodes[v].distances;
            s.s_f += -yy * d.d_u;
            s.s_g += -yy * d.d_tp;
            s.s_h += -yy * d.d_kw;
        }
        for (auto ei : comp.edges) {
            const double diff = static_cast<double>(y[edges[ei].node_a] - y[edges[ei].node_b]);
            s.s_edge += -(diff * diff);
        }
        return s;
    };

    const std::uint64_t total = 1ull << f;

    auto apply_mask = [&](std::uint64_t mask) {
        for (std::size_t b = 0; b < f; ++b) {
            y[free_nodes[b]] = (mask >> b) & 1 ? 1 : -1;
        }
    };

    // Pass 1: max log-weight for stable exponentiation.
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        apply_mask(mask);
        max_lw = std::max(max_lw, stats_of().dot(params));
    }

    // Pass 2: accumulate Z, E[S] and per-node positive mass.
    double z = 0.0;
    SufficientStats weighted;
    std::vector<double> pos_mass(f, 0.0);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        apply_mask(mask);
        SufficientStats s = stats_of();
        const double w = std::exp(s.dot(params) - max_lw);
        z += w;
        weighted.s_f += w * s.s_f;
        weighted.s_g += w * s.s_g;
        weighted.s_h += w * s.s_h;
        weighted.s_edge += w * s.s_edge;
        for (std::size_t b = 0; b < f; ++b) {
            if ((mask >> b) & 1) pos_mass[b] += w;
        }
    }

    ComponentStats out;
    out.log_z = max_lw + std::log(z);
    out.expected.s_f = weighted.s_f / z;
    out.expected.s_g = weighted.s_g / z;
    out.expected.s_h = weighted.s_h / z;
    out.expected.s_edge = weighted.s_edge / z;
    out.p_pos.resize(f);
    for (std::size_t b = 0; b < f; ++b) out.p_pos[b] = pos_mass[b] / z;
    return out;
}

}  // namespace

ExactResult exact_inference(const FactorGraph& graph, const Params& params, bool clamped) {
    ExactResult res;
    res.p_pos.assign(graph.size(), 0.0);
    for (const auto& comp : graph.components()) {
        std::vector<std::uint32_t> free_nodes;
        for (auto v : comp.nodes) {
            if (!clamped || graph.nodes()[v].label == 0) free_nodes.push_back(v);
        }
        ComponentStats cs = enumerate_component(graph, params, comp, free_nodes);
        res.log_z += cs.log_z;
        res.expected += cs.expected;
        for (std::size_t b = 0; b < free_nodes.size(); ++b) res.p_pos[free_nodes[b]] = cs.p_pos[b];
    }
    if (clamped) {
        for (std::size_t i = 0; i < graph.size(); ++i) {
            if (graph.nodes()[i].label != 0) {
                res.p_pos[i] = graph.nodes()[i].label > 0 ? 1.0 : 0.0;
            }
        }
    }
    return res;
}

double log_likelihood(const FactorGraph& graph, const Params& params) {
    return exact_inference(graph, params, true).log_z - exact_inference(graph, params, false).log_z;
}

std::array<double, 4> gradient(const FactorGraph& graph, const Params& params) {
    auto clamped = exact_inference(graph, params, true).expected.as_array();
    auto free = exact_inference(graph, params, false).expected.as_array();
    return {clamped[0] - free[0], clamped[1] - free[1], clamped[2] - free[2],
            clamped[3] - free[3]};
}

}  // namespace fgrec

#pragma once
// Topic-level direct influence between user pairs and indirect-influence
// edges between behavior nodes. An edge requires a shared topic and either
// a same-author closure or a strong direct-influence link; per-node degree
// is capped, keeping the strongest links.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "fgrec/corpus.hpp"
#include "fgrec/features.hpp"

namespace fgrec {

struct InfluenceParams {
    double sigma = 5.0;  // tanh scale
    double w_forward = 1.0;
    double w_reply = 0.5;
    double w_comment = 0.5;
    double w_mention = 0.25;

    double kind_weight(InteractionKind k) const;
};

// argmax of the topic vector, ties broken by lowest index.
std::uint32_t dominant_topic(std::span<const double> topics);

// Signed influence of `source` on `target` for topic k, in [-1, 1]. Each
// interaction between the two users on an item whose dominant topic is k
// contributes sign * kind weight, where sign is the target's known label
// on that item (+1 when unlabeled); the sum is squashed by tanh(s / sigma).
double direct_influence(const Corpus& corpus, const InfluenceParams& params, std::uint32_t source,
                        std::uint32_t target, std::uint32_t topic);

// All nonzero influence scores, keyed by (source, target) and topic.
class InfluenceTable {
public:
    InfluenceTable() = default;
    InfluenceTable(const Corpus& corpus, const InfluenceParams& params);

    double score(std::uint32_t source, std::uint32_t target, std::uint32_t topic) const;
    // max |score| over both directions of the pair
    double pair_strength(std::uint32_t a, std::uint32_t b, std::uint32_t topic) const;

    // Directed (source, target) pairs with at least one scored topic.
    const std::vector<std::uint64_t>& scored_pairs() const { return scored_pairs_; }
    std::vector<std::uint32_t> topics_for(std::uint32_t source, std::uint32_t target) const;

private:
    // key: (pair_key(source,target) * n_topics + topic) is too wide; use a
    // nested map keyed by the directed pair.
    std::unordered_map<std::uint64_t, std::unordered_map<std::uint32_t, double>> scores_;
    std::vector<std::uint64_t> scored_pairs_;
};

struct EdgeParams {
    double tau = 0.7;       // topic cosine threshold
    double delta = 0.3;     // influence magnitude threshold
    std::uint32_t d_max = 10;  // per-node degree cap (0 disables all edges)
};

struct Edge {
    std::uint32_t node_a = 0;  // node_a < node_b
    std::uint32_t node_b = 0;
    std::uint32_t topic = 0;   // shared dominant topic
    double weight_basis = 0.0;
};

// Behavior node identity as the edge builder sees it.
struct BehaviorRef {
    std::uint32_t user = 0;
    std::uint32_t item = 0;
};

std::vector<Edge> build_edges(const Corpus& corpus, const std::vector<BehaviorRef>& nodes,
                              const InfluenceTable& influence, const EdgeParams& params);

}  // namespace fgrec

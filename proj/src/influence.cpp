#include "fgrec/influence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fgrec/kernels.hpp"

namespace fgrec {

double InfluenceParams::kind_weight(InteractionKind k) const {
    switch (k) {
        case InteractionKind::reply: return w_reply;
        case InteractionKind::comment: return w_comment;
        case InteractionKind::forward: return w_forward;
        case InteractionKind::mention: return w_mention;
    }
    return 0.0;
}

std::uint32_t dominant_topic(std::span<const double> topics) {
    if (topics.empty()) throw std::invalid_argument("dominant_topic: empty topic vector");
    std::uint32_t best = 0;
    for (std::uint32_t i = 1; i < topics.size(); ++i) {
        if (topics[i] > topics[best]) best = i;
    }
    return best;
}

double direct_influence(const Corpus& corpus, const InfluenceParams& params, std::uint32_t source,
                        std::uint32_t target, std::uint32_t topic) {
    if (source == target) throw std::invalid_argument("direct_influence: users must differ");
    if (topic >= corpus.n_topics) throw std::invalid_argument("direct_influence: invalid topic index");
    double s = 0.0;
    for (const auto& ev : corpus.interactions) {
        bool within_pair = (ev.actor == source && ev.target_author == target) ||
                           (ev.actor == target && ev.target_author == source);
        if (!within_pair) continue;
        if (dominant_topic(corpus.items[ev.item].topics) != topic) continue;
        double sign = 1.0;
        if (auto it = corpus.labels.known.find(pair_key(target, ev.item));
            it != corpus.labels.known.end()) {
            sign = static_cast<double>(it->second);
        }
        s += sign * params.kind_weight(ev.kind);
    }
    return std::tanh(s / params.sigma);
}

InfluenceTable::InfluenceTable(const Corpus& corpus, const InfluenceParams& params) {
    // One pass over interactions, accumulating the signed sums per
    // (source, target, topic) in both directions.
    std::unordered_map<std::uint64_t, std::unordered_map<std::uint32_t, double>> sums;
    for (const auto& ev : corpus.interactions) {
        if (ev.actor == ev.target_author) continue;
        std::uint32_t topic = dominant_topic(corpus.items[ev.item].topics);
        double w = params.kind_weight(ev.kind);
        // The event counts for both directions; the sign depends on which
        // endpoint plays the target role.
        const std::uint32_t ends[2] = {ev.actor, ev.target_author};
        for (int d = 0; d < 2; ++d) {
            std::uint32_t source = ends[d];
            std::uint32_t target = ends[1 - d];
            double sign = 1.0;
            if (auto it = corpus.labels.known.find(pair_key(target, ev.item));
                it != corpus.labels.known.end()) {
                sign = static_cast<double>(it->second);
            }
            sums[pair_key(source, target)][topic] += sign * w;
        }
    }
    for (auto& [pair, by_topic] : sums) {
        auto& dst = scores_[pair];
        for (auto& [topic, s] : by_topic) {
            dst[topic] = std::tanh(s / params.sigma);
        }
        scored_pairs_.push_back(pair);
    }
    std::sort(scored_pairs_.begin(), scored_pairs_.end());
}

double InfluenceTable::score(std::uint32_t source, std::uint32_t target, std::uint32_t topic) const {
    auto it = scores_.find(pair_key(source, target));
    if (it == scores_.end()) return 0.0;
    auto jt = it->second.find(topic);
    return jt == it->second.end() ? 0.0 : jt->second;
}

double InfluenceTable::pair_strength(std::uint32_t a, std::uint32_t b, std::uint32_t topic) const {
    double fwd = score(a, b, topic);
    double rev = score(b, a, topic);
    return std::fabs(fwd) >= std::fabs(rev) ? fwd : rev;
}

std::vector<std::uint32_t> InfluenceTable::topics_for(std::uint32_t source,
                                                      std::uint32_t target) const {
    std::vector<std::uint32_t> out;
    auto it = scores_.find(pair_key(source, target));
    if (it == scores_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& [topic, s] : it->second) out.push_back(topic);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct Candidate {
    double strength;  // |weight_basis|
    std::uint32_t a, b;
    std::uint32_t topic;
    double basis;
};

double topic_cosine(std::span<const double> x, std::span<const double> y) {
    double nx = kernels::dot(x, x);
    double ny = kernels::dot(y, y);
    if (nx <= 0.0 || ny <= 0.0) return 0.0;
    return kernels::dot(x, y) / std::sqrt(nx * ny);
}

}  // namespace

std::vector<Edge> build_edges(const Corpus& corpus, const std::vector<BehaviorRef>& nodes,
                              const InfluenceTable& influence, const EdgeParams& params) {
    std::vector<Edge> edges;
    if (params.d_max == 0 || nodes.size() < 2) return edges;

    std::vector<std::uint32_t> dom(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        dom[i] = dominant_topic(corpus.items[nodes[i].item].topics);
    }

    // Shared topic of a candidate pair: the common dominant topic, or the
    // argmax of the pooled topic vectors when they differ.
    auto shared_topic = [&](std::uint32_t i, std::uint32_t j) -> std::uint32_t {
        if (dom[i] == dom[j]) return dom[i];
        const auto& ti = corpus.items[nodes[i].item].topics;
        const auto& tj = corpus.items[nodes[j].item].topics;
        std::uint32_t best = 0;
        for (std::uint32_t k = 1; k < ti.size(); ++k) {
            if (ti[k] + tj[k] > ti[best] + tj[best]) best = k;
        }
        return best;
    };

    auto common_topic_ok = [&](std::uint32_t i, std::uint32_t j) {
        if (dom[i] == dom[j]) return true;
        return topic_cosine(corpus.items[nodes[i].item].topics,
                            corpus.items[nodes[j].item].topics) >= params.tau;
    };

    std::vector<Candidate> candidates;
    auto consider = [&](std::uint32_t i, std::uint32_t j) {
        if (i == j) return;
        std::uint32_t a = std::min(i, j);
        std::uint32_t b = std::max(i, j);
        if (!common_topic_ok(a, b)) return;
        std::uint32_t topic = shared_topic(a, b);
        bool same_author =
            corpus.items[nodes[a].item].author == corpus.items[nodes[b].item].author;
        double basis = influence.pair_strength(nodes[a].user, nodes[b].user, topic);
        if (!same_author && std::fabs(basis) < params.delta) return;
        candidates.push_back({std::fabs(basis), a, b, topic, basis});
    };

    // Clause (b) first branch: same-author closure. Group nodes by the
    // item's author and try every pair within a group.
    {
        std::vector<std::uint32_t> order(nodes.size());
        for (std::uint32_t i = 0; i < nodes.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
            std::uint32_t ax = corpus.items[nodes[x].item].author;
            std::uint32_t ay = corpus.items[nodes[y].item].author;
            return ax != ay ? ax < ay : x < y;
        });
        std::size_t start = 0;
        while (start < order.size()) {
            std::size_t end = start + 1;
            std::uint32_t author = corpus.items[nodes[order[start]].item].author;
            while (end < order.size() && corpus.items[nodes[order[end]].item].author == author) {
                ++end;
            }
            for (std::size_t i = start; i < end; ++i) {
                for (std::size_t j = i + 1; j < end; ++j) {
                    consider(order[i], order[j]);
                }
            }
            start = end;
        }
    }

    // Clause (b) second branch: strong direct influence between the two
    // node users. Only scored pairs can qualify.
    {
        std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_user;
        for (std::uint32_t i = 0; i < nodes.size(); ++i) by_user[nodes[i].user].push_back(i);
        for (std::uint64_t pair : influence.scored_pairs()) {
            std::uint32_t u = pair_user(pair);
            std::uint32_t v = pair_item(pair);
            if (u > v) continue;  // each unordered user pair once
            auto ui = by_user.find(u);
            auto vi = by_user.find(v);
            if (ui == by_user.end() || vi == by_user.end()) continue;
            for (auto i : ui->second) {
                for (auto j : vi->second) {
                    consider(i, j);
                }
            }
        }
    }

    // Dedup, then apply the degree cap keeping the strongest bases.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.strength > y.strength;
    });
    candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                 [](const Candidate& x, const Candidate& y) {
                                     return x.a == y.a && x.b == y.b;
                                 }),
                     candidates.end());
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) { return x.strength > y.strength; });

    std::vector<std::uint32_t> degree(nodes.size(), 0);
    for (const auto& c : candidates) {
        if (degree[c.a] >= params.d_max || degree[c.b] >= params.d_max) continue;
        edges.push_back({c.a, c.b, c.topic, c.basis});
        ++degree[c.a];
        ++degree[c.b];
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return x.node_a != y.node_a ? x.node_a < y.node_a : x.node_b < y.node_b;
    });
    return edges;
}

}  // namespace fgrec

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fgrec/influence.hpp"
#include "fgrec/rng.hpp"
#include "test_util.hpp"

using namespace fgrec;

namespace {

// n users; items get explicit topic vectors and authors.
Corpus make_corpus(std::uint32_t n_users, const std::vector<Item>& items) {
    Corpus c;
    c.users.resize(n_users);
    for (std::uint32_t u = 0; u < n_users; ++u) {
        c.users[u].id = "u" + std::to_string(u);
        c.user_index.emplace(c.users[u].id, u);
    }
    c.items = items;
    for (std::uint32_t i = 0; i < c.items.size(); ++i) c.item_index.emplace(c.items[i].id, i);
    c.n_topics = items.empty() ? 0 : static_cast<std::uint32_t>(items[0].topics.size());
    return c;
}

Item item_on_topic(const std::string& id, std::uint32_t author, std::uint32_t topic,
                   std::uint32_t k = 3) {
    Item it;
    it.id = id;
    it.author = author;
    it.topics.assign(k, 0.05);
    it.topics[topic] = 1.0;
    double total = 0.0;
    for (double t : it.topics) total += t;
    for (double& t : it.topics) t /= total;
    it.keywords = {{"kw" + id, 1.0}};
    return it;
}

}  // namespace

TEST_CASE("dominant topic is the argmax with low-index ties") {
    std::vector<double> t{0.2, 0.5, 0.3};
    CHECK(dominant_topic(t) == 1);
    std::vector<double> tie{0.4, 0.4, 0.2};
    CHECK(dominant_topic(tie) == 0);
    CHECK_THROWS(dominant_topic(std::vector<double>{}));
}

TEST_CASE("direct influence follows the tanh of signed weighted counts") {
    Corpus c = make_corpus(3, {item_on_topic("i0", 0, 0), item_on_topic("i1", 0, 1)});
    InfluenceParams params;

    SUBCASE("no interactions on the topic gives zero") {
        CHECK(direct_influence(c, params, 0, 1, 0) == 0.0);
        c.interactions.push_back({InteractionKind::forward, 1, 0, 1, 0});  // topic 1
        CHECK(direct_influence(c, params, 0, 1, 0) == 0.0);
    }

    SUBCASE("one forward with a known +1 label gives tanh(0.2)") {
        c.interactions.push_back({InteractionKind::forward, 1, 0, 0, 0});
        c.labels.known.emplace(pair_key(1, 0), 1);  // B's label on the item
        CHECK(direct_influence(c, params, 0, 1, 0) ==
              doctest::Approx(std::tanh(0.2)).epsilon(1e-12));
        CHECK(std::tanh(0.2) == doctest::Approx(0.19737).epsilon(1e-4));
    }

    SUBCASE("unlabeled interactions default to positive sign") {
        c.interactions.push_back({InteractionKind::reply, 1, 0, 0, 0});
        CHECK(direct_influence(c, params, 0, 1, 0) ==
              doctest::Approx(std::tanh(0.5 / 5.0)).epsilon(1e-12));
    }

    SUBCASE("the score saturates toward but never past 1") {
        for (int i = 0; i < 90; ++i) {
            c.interactions.push_back({InteractionKind::forward, 1, 0, 0, 0});
        }
        double s = direct_influence(c, params, 0, 1, 0);
        CHECK(s < 1.0);  // tanh(18) is still representable below 1
        CHECK(s > 0.99);
        for (int i = 0; i < 5000; ++i) {
            c.interactions.push_back({InteractionKind::forward, 1, 0, 0, 0});
        }
        CHECK(direct_influence(c, params, 0, 1, 0) <= 1.0);
    }

    SUBCASE("invalid topic index throws") {
        CHECK_THROWS(direct_influence(c, params, 0, 1, 7));
        CHECK_THROWS(direct_influence(c, params, 0, 0, 0));
    }
}

TEST_CASE("flipping every known label of the target negates the score") {
    Rng rng(57);
    Corpus c = make_corpus(2, {item_on_topic("i0", 0, 0), item_on_topic("i1", 0, 0),
                               item_on_topic("i2", 0, 0)});
    InfluenceParams params;
    for (int i = 0; i < 60; ++i) {
        auto kind = static_cast<InteractionKind>(rng.below(4));
        bool ab = rng.bernoulli(0.5);
        c.interactions.push_back({kind, ab ? 0u : 1u, ab ? 1u : 0u,
                                  static_cast<std::uint32_t>(rng.below(3)),
                                  static_cast<std::int64_t>(i)});
    }
    // Every touched item carries a known label for user 1 (the target).
    for (std::uint32_t j = 0; j < 3; ++j) {
        c.labels.known.emplace(pair_key(1, j), rng.bernoulli(0.5) ? 1 : -1);
    }
    const double score = direct_influence(c, params, 0, 1, 0);
    for (std::uint32_t j = 0; j < 3; ++j) {
        c.labels.known[pair_key(1, j)] = static_cast<std::int8_t>(-c.labels.known[pair_key(1, j)]);
    }
    const double flipped = direct_influence(c, params, 0, 1, 0);
    CHECK(flipped == doctest::Approx(-score).epsilon(1e-12));
}

TEST_CASE("influence table matches the per-call computation") {
    Rng rng(59);
    Corpus c = make_corpus(4, {item_on_topic("i0", 0, 0), item_on_topic("i1", 1, 1),
                               item_on_topic("i2", 2, 2), item_on_topic("i3", 3, 0)});
    InfluenceParams params;
    for (int i = 0; i < 120; ++i) {
        auto actor = static_cast<std::uint32_t>(rng.below(4));
        auto target = static_cast<std::uint32_t>(rng.below(4));
        c.interactions.push_back({static_cast<InteractionKind>(rng.below(4)), actor, target,
                                  static_cast<std::uint32_t>(rng.below(4)),
                                  static_cast<std::int64_t>(i)});
    }
    for (std::uint32_t u = 0; u < 4; ++u) {
        for (std::uint32_t j = 0; j < 4; ++j) {
            if (rng.bernoulli(0.5)) c.labels.known.emplace(pair_key(u, j), rng.bernoulli(0.5) ? 1 : -1);
        }
    }
    InfluenceTable table(c, params);
    for (std::uint32_t a = 0; a < 4; ++a) {
        for (std::uint32_t b = 0; b < 4; ++b) {
            if (a == b) continue;
            for (std::uint32_t k = 0; k < 3; ++k) {
                CHECK(table.score(a, b, k) ==
                      doctest::Approx(direct_influence(c, params, a, b, k)).epsilon(1e-12));
            }
        }
    }
}

namespace {

// Independent reimplementation of the edge rule for cross-checking:
// enumerate all node pairs, test both clauses, then apply the degree cap
// greedily by |basis| with lexicographic ties.
std::vector<Edge> edge_oracle(const Corpus& c, const std::vector<BehaviorRef>& nodes,
                              const InfluenceTable& table, const EdgeParams& p) {
    struct Cand {
        double strength;
        std::uint32_t a, b, topic;
        double basis;
    };
    std::vector<Cand> cands;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        for (std::uint32_t j = i + 1; j < nodes.size(); ++j) {
            const auto& ti = c.items[nodes[i].item].topics;
            const auto& tj = c.items[nodes[j].item].topics;
            std::uint32_t di = dominant_topic(ti), dj = dominant_topic(tj);
            double dotv = 0.0, ni = 0.0, nj = 0.0;
            for (std::size_t k = 0; k < ti.size(); ++k) {
                dotv += ti[k] * tj[k];
                ni += ti[k] * ti[k];
                nj += tj[k] * tj[k];
            }
            bool common = di == dj || dotv / std::sqrt(ni * nj) >= p.tau;
            if (!common) continue;
            std::uint32_t topic = di;
            if (di != dj) {
                topic = 0;
                for (std::uint32_t k = 1; k < ti.size(); ++k) {
                    if (ti[k] + tj[k] > ti[topic] + tj[topic]) topic = k;
                }
            }
            bool same_author = c.items[nodes[i].item].author == c.items[nodes[j].item].author;
            double basis = table.pair_strength(nodes[i].user, nodes[j].user, topic);
            if (!same_author && std::fabs(basis) < p.delta) continue;
            cands.push_back({std::fabs(basis), i, j, topic, basis});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.strength != y.strength) return x.strength > y.strength;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<std::uint32_t> degree(nodes.size(), 0);
    std::vector<Edge> out;
    for (const auto& cand : cands) {
        if (degree[cand.a] >= p.d_max || degree[cand.b] >= p.d_max) continue;
        out.push_back({cand.a, cand.b, cand.topic, cand.basis});
        ++degree[cand.a];
        ++degree[cand.b];
    }
    std::sort(out.begin(), out.end(), [](const Edge& x, const Edge& y) {
        return x.node_a != y.node_a ? x.node_a < y.node_a : x.node_b < y.node_b;
    });
    return out;
}

}  // namespace

TEST_CASE("edge construction") {
    SUBCASE("disjoint dominant topics with orthogonal vectors stay unlinked") {
        Corpus c = make_corpus(3, {item_on_topic("i0", 0, 0), item_on_topic("i1", 0, 1)});
        c.items[0].topics = {1.0, 0.0, 0.0};
        c.items[1].topics = {0.0, 1.0, 0.0};
        InfluenceTable table(c, InfluenceParams{});
        std::vector<BehaviorRef> nodes{{1, 0}, {2, 1}};
        CHECK(build_edges(c, nodes, table, EdgeParams{}).empty());
    }

    SUBCASE("same-author closure links same-topic nodes without interactions") {
        Corpus c = make_corpus(3, {item_on_topic("i0", 0, 2), item_on_topic("i1", 0, 2)});
        InfluenceTable table(c, InfluenceParams{});
        std::vector<BehaviorRef> nodes{{1, 0}, {2, 1}};
        auto edges = build_edges(c, nodes, table, EdgeParams{});
        REQUIRE(edges.size() == 1);
        CHECK(edges[0].node_a == 0);
        CHECK(edges[0].node_b == 1);
        CHECK(edges[0].topic == 2);
        CHECK(edges[0].weight_basis == 0.0);
    }

    SUBCASE("degree cap holds on a same-topic clique and matches the oracle") {
        // 20 nodes on items by one author, all on one topic; every pair is a
        // candidate, the cap must keep each node at degree <= 10.
        std::vector<Item> items;
        for (int i = 0; i < 20; ++i) {
            items.push_back(item_on_topic("i" + std::to_string(i), 0, 1));
        }
        Corpus c = make_corpus(21, items);
        Rng rng(61);
        for (int i = 0; i < 200; ++i) {
            auto a = static_cast<std::uint32_t>(1 + rng.below(20));
            c.interactions.push_back({InteractionKind::forward, a, 0,
                                      static_cast<std::uint32_t>(rng.below(20)),
                                      static_cast<std::int64_t>(i)});
        }
        InfluenceTable table(c, InfluenceParams{});
        std::vector<BehaviorRef> nodes;
        for (std::uint32_t i = 0; i < 20; ++i) nodes.push_back({i + 1, i});
        EdgeParams params;
        auto edges = build_edges(c, nodes, table, params);

        std::vector<int> degree(nodes.size(), 0);
        for (const auto& e : edges) {
            ++degree[e.node_a];
            ++degree[e.node_b];
        }
        for (int d : degree) CHECK(d <= 10);
        CHECK(edges.size() <= nodes.size() * params.d_max / 2);

        auto expected = edge_oracle(c, nodes, table, params);
        REQUIRE(edges.size() == expected.size());
        for (std::size_t i = 0; i < edges.size(); ++i) {
            CHECK(edges[i].node_a == expected[i].node_a);
            CHECK(edges[i].node_b == expected[i].node_b);
            CHECK(edges[i].topic == expected[i].topic);
            CHECK(edges[i].weight_basis == expected[i].weight_basis);
        }
    }

    SUBCASE("influence clause links cross-author nodes") {
        Corpus c = make_corpus(4, {item_on_topic("i0", 0, 1), item_on_topic("i1", 1, 1)});
        // Heavy forwarding between users 2 and 3 on topic-1 items.
        for (int i = 0; i < 40; ++i) {
            c.interactions.push_back({InteractionKind::forward, 2, 3,
                                      static_cast<std::uint32_t>(i % 2),
                                      static_cast<std::int64_t>(i)});
        }
        InfluenceTable table(c, InfluenceParams{});
        std::vector<BehaviorRef> nodes{{2, 0}, {3, 1}};
        auto edges = build_edges(c, nodes, table, EdgeParams{});
        REQUIRE(edges.size() == 1);
        CHECK(std::fabs(edges[0].weight_basis) >= EdgeParams{}.delta);
    }

    SUBCASE("d_max = 0 disables all edges") {
        Corpus c = make_corpus(3, {item_on_topic("i0", 0, 0), item_on_topic("i1", 0, 0)});
        InfluenceTable table(c, InfluenceParams{});
        std::vector<BehaviorRef> nodes{{1, 0}, {2, 1}};
        EdgeParams params;
        params.d_max = 0;
        CHECK(build_edges(c, nodes, table, params).empty());
    }

    SUBCASE("edge set is deterministic") {
        Rng rng(63);
        std::vector<Item> items;
        for (int i = 0; i < 12; ++i) {
            items.push_back(item_on_topic("i" + std::to_string(i), rng.below(3),
                                          static_cast<std::uint32_t>(rng.below(2))));
        }
        Corpus c = make_corpus(8, items);
        for (int i = 0; i < 100; ++i) {
            c.interactions.push_back({static_cast<InteractionKind>(rng.below(4)),
                                      static_cast<std::uint32_t>(rng.below(8)),
                                      static_cast<std::uint32_t>(rng.below(8)),
                                      static_cast<std::uint32_t>(rng.below(12)),
                                      static_cast<std::int64_t>(i)});
        }
        InfluenceTable table(c, InfluenceParams{});
        std::vector<BehaviorRef> nodes;
        for (std::uint32_t i = 0; i < 12; ++i) {
            nodes.push_back({static_cast<std::uint32_t>((i + 3) % 8), i});
        }
        auto e1 = build_edges(c, nodes, table, EdgeParams{});
        auto e2 = build_edges(c, nodes, table, EdgeParams{});
        REQUIRE(e1.size() == e2.size());
        for (std::size_t i = 0; i < e1.size(); ++i) {
            CHECK(e1[i].node_a == e2[i].node_a);
            CHECK(e1[i].node_b == e2[i].node_b);
            CHECK(e1[i].weight_basis == e2[i].weight_basis);
        }
        // And it agrees with the brute-force oracle.
        auto expected = edge_oracle(c, nodes, table, EdgeParams{});
        REQUIRE(e1.size() == expected.size());
        for (std::size_t i = 0; i < e1.size(); ++i) {
            CHECK(e1[i].node_a == expected[i].node_a);
            CHECK(e1[i].node_b == expected[i].node_b);
        }
    }
}

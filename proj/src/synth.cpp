#include "fgrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fgrec/features.hpp"
#include "fgrec/influence.hpp"
#include "fgrec/kernels.hpp"
#include "fgrec/rng.hpp"

namespace fgrec {

namespace {

constexpr std::uint64_t kActivityCap = 100000;
constexpr std::size_t kLexiconTerms = 30;   // core vocabulary per topic
constexpr std::size_t kProfileTerms = 8;    // keyword-profile support per user
constexpr std::size_t kFolloweeTarget = 8;
constexpr int kGibbsSweeps = 1000;

void validate_config(const SynthConfig& c) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("synth config: " + msg); };
    if (c.n_users < 2) fail("n_users must be at least 2");
    if (c.n_items < 1) fail("n_items must be at least 1");
    if (c.n_topics < 1) fail("n_topics must be at least 1");
    if (c.vocab_size < 3) fail("vocab_size must be at least 3 (items carry 3 keywords)");
    if (!(c.powerlaw_exponent > 1.0)) fail("powerlaw_exponent must exceed 1");
    if (!(c.known_fraction > 0.0 && c.known_fraction < 1.0)) {
        fail("known_fraction must lie strictly inside (0,1)");
    }
    if (c.behaviors_per_user < 1) fail("behaviors_per_user must be at least 1");
}

// Inverse-CDF sampling over fixed nonnegative weights.
class WeightedSampler {
public:
    explicit WeightedSampler(std::span<const double> weights) {
        cdf_.reserve(weights.size());
        double acc = 0.0;
        for (double w : weights) {
            acc += w;
            cdf_.push_back(acc);
        }
        if (!(acc > 0.0)) throw std::invalid_argument("WeightedSampler: zero total weight");
    }
    std::size_t sample(Rng& rng) const {
        double u = rng.uniform() * cdf_.back();
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) return cdf_.size() - 1;
        return static_cast<std::size_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

std::string user_id(std::uint32_t i) { return "u" + std::to_string(i); }
std::string item_id(std::uint32_t i) { return "i" + std::to_string(i); }
std::string term_id(std::uint32_t i) { return "t" + std::to_string(i); }

struct Gen {
    explicit Gen(const SynthConfig& c) : cfg(c) {}

    const SynthConfig& cfg;
    Corpus corpus;

    std::vector<std::uint64_t> activity;
    std::vector<std::uint32_t> pref_topic;
    std::vector<std::vector<double>> tp_pref;
    std::vector<SparseVec> kw_pref;
    std::vector<std::array<double, kAttrColumns>> u_pref;

    std::vector<std::vector<std::uint32_t>> lexicon;  // per topic, distinct term indices
    std::vector<std::uint32_t> item_dom;
    std::vector<SparseVec> item_kw;
    std::vector<std::vector<std::uint32_t>> items_by_author;

    std::vector<std::uint64_t> pairs;
    std::vector<NodeDistances> dists;
};

std::vector<std::uint32_t> draw_distinct(Rng& rng, const ZipfTable& table, std::size_t want,
                                         std::uint32_t limit) {
    std::vector<std::uint32_t> out;
    std::vector<bool> taken(limit, false);
    want = std::min<std::size_t>(want, limit);
    while (out.size() < want) {
        auto idx = static_cast<std::uint32_t>(table.sample(rng));
        int tries = 0;
        while (taken[idx] && tries++ < 64) idx = static_cast<std::uint32_t>(table.sample(rng));
        while (taken[idx]) idx = (idx + 1) % limit;  // deterministic fallback
        taken[idx] = true;
        out.push_back(idx);
    }
    return out;
}

void generate_users(Gen& g) {
    const auto& cfg = g.cfg;
    Rng act_rng(derive_seed(cfg.seed, "synth.activity"));
    Rng topic_rng(derive_seed(cfg.seed, "synth.topics"));
    Rng lex_rng(derive_seed(cfg.seed, "synth.lexicon"));
    Rng follow_rng(derive_seed(cfg.seed, "synth.follow"));

    g.activity.resize(cfg.n_users);
    for (auto& a : g.activity) a = std::min(act_rng.zipf(cfg.powerlaw_exponent), kActivityCap);

    ZipfTable vocab_zipf(cfg.vocab_size, 1.2);
    g.lexicon.resize(cfg.n_topics);
    for (auto& lex : g.lexicon) {
        lex = draw_distinct(lex_rng, vocab_zipf, kLexiconTerms, cfg.vocab_size);
    }

    g.pref_topic.resize(cfg.n_users);
    g.tp_pref.resize(cfg.n_users);
    g.kw_pref.resize(cfg.n_users);
    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        g.pref_topic[u] = static_cast<std::uint32_t>(topic_rng.below(cfg.n_topics));
        auto tp = topic_rng.dirichlet(cfg.n_topics, 0.3);
        tp[g.pref_topic[u]] += 3.0;
        kernels::scale(tp, 1.0 / kernels::sum(tp));
        g.tp_pref[u] = std::move(tp);

        const auto& lex = g.lexicon[g.pref_topic[u]];
        std::size_t support = std::min(kProfileTerms, lex.size());
        std::vector<bool> used(lex.size(), false);
        SparseVec kw;
        for (std::size_t k = 0; k < support; ++k) {
            std::size_t pick = topic_rng.below(lex.size());
            while (used[pick]) pick = (pick + 1) % lex.size();
            used[pick] = true;
            kw.entries.emplace_back(lex[pick], 0.5 + topic_rng.uniform());
        }
        std::sort(kw.entries.begin(), kw.entries.end());
        kw.normalize_l2();
        g.kw_pref[u] = std::move(kw);
    }

    // Follow graph, preferential by activity.
    std::vector<double> weights(cfg.n_users);
    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        weights[u] = static_cast<double>(g.activity[u]);
    }
    WeightedSampler by_activity(weights);
    g.corpus.users.resize(cfg.n_users);
    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        User& usr = g.corpus.users[u];
        usr.id = user_id(u);
        g.corpus.user_index.emplace(usr.id, u);
        std::size_t want = std::min<std::size_t>(kFolloweeTarget, cfg.n_users - 1);
        std::vector<bool> taken(cfg.n_users, false);
        taken[u] = true;
        int tries = 0;
        while (usr.followees.size() < want && tries++ < 200) {
            auto pick = static_cast<std::uint32_t>(by_activity.sample(follow_rng));
            if (taken[pick]) continue;
            taken[pick] = true;
            usr.followees.push_back(pick);
        }
        std::sort(usr.followees.begin(), usr.followees.end());
    }
}

void generate_items(Gen& g) {
    const auto& cfg = g.cfg;
    Rng rng(derive_seed(cfg.seed, "synth.items"));
    ZipfTable vocab_zipf(cfg.vocab_size, 1.2);

    std::vector<double> author_weights(cfg.n_users);
    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        author_weights[u] = static_cast<double>(g.activity[u]);
    }
    WeightedSampler by_activity(author_weights);

    g.corpus.items.resize(cfg.n_items);
    g.corpus.n_topics = cfg.n_topics;
    g.item_dom.resize(cfg.n_items);
    g.item_kw.resize(cfg.n_items);
    g.items_by_author.assign(cfg.n_users, {});
    for (std::uint32_t j = 0; j < cfg.n_items; ++j) {
        Item& item = g.corpus.items[j];
        item.id = item_id(j);
        item.author = static_cast<std::uint32_t>(by_activity.sample(rng));
        g.items_by_author[item.author].push_back(j);
        g.corpus.item_index.emplace(item.id, j);

        std::uint32_t dom = g.pref_topic[item.author];
        if (!rng.bernoulli(0.85)) dom = static_cast<std::uint32_t>(rng.below(cfg.n_topics));
        auto tp = rng.dirichlet(cfg.n_topics, 0.25);
        tp[dom] += 2.5;
        kernels::scale(tp, 1.0 / kernels::sum(tp));
        item.topics = std::move(tp);
        g.item_dom[j] = dominant_topic(item.topics);

        // Three distinct keywords: mostly the dominant topic's lexicon,
        // otherwise the global vocabulary.
        const auto& lex = g.lexicon[dom];
        std::vector<std::uint32_t> terms;
        while (terms.size() < 3) {
            std::uint32_t t;
            if (rng.bernoulli(0.7) && !lex.empty()) {
                t = lex[rng.below(lex.size())];
            } else {
                t = static_cast<std::uint32_t>(vocab_zipf.sample(rng));
            }
            int tries = 0;
            while (std::find(terms.begin(), terms.end(), t) != terms.end() && tries++ < 30) {
                t = static_cast<std::uint32_t>(vocab_zipf.sample(rng));
            }
            while (std::find(terms.begin(), terms.end(), t) != terms.end()) {
                t = (t + 1) % cfg.vocab_size;
            }
            terms.push_back(t);
        }
        auto w = rng.dirichlet(3, 1.0);
        for (int k = 0; k < 3; ++k) item.keywords.push_back({term_id(terms[k]), w[k]});
        SparseVec& kw = g.item_kw[j];
        for (int k = 0; k < 3; ++k) kw.entries.emplace_back(terms[k], w[k]);
        std::sort(kw.entries.begin(), kw.entries.end());
        item.timestamp = j;
    }
}

void generate_interactions(Gen& g) {
    const auto& cfg = g.cfg;
    Rng rng(derive_seed(cfg.seed, "synth.interactions"));
    std::int64_t ts = static_cast<std::int64_t>(cfg.n_items);

    auto pick_item_for = [&](std::uint32_t u) -> std::int64_t {
        const auto& follows = g.corpus.users[u].followees;
        // Prefer followees' items on the preferred topic.
        for (int attempt = 0; attempt < 6 && !follows.empty(); ++attempt) {
            std::uint32_t f = follows[rng.below(follows.size())];
            const auto& pool = g.items_by_author[f];
            if (pool.empty()) continue;
            std::uint32_t j = pool[rng.below(pool.size())];
            if (g.item_dom[j] == g.pref_topic[u] || attempt >= 3) return j;
        }
        // Fallback: any item not authored by u.
        for (int attempt = 0; attempt < 20; ++attempt) {
            std::uint32_t j = static_cast<std::uint32_t>(rng.below(cfg.n_items));
            if (g.corpus.items[j].author != u) return j;
        }
        return -1;
    };

    auto emit = [&](InteractionKind kind, std::uint32_t u, std::uint64_t n) {
        for (std::uint64_t k = 0; k < n; ++k) {
            std::int64_t j = pick_item_for(u);
            if (j < 0) continue;
            const Item& item = g.corpus.items[static_cast<std::size_t>(j)];
            g.corpus.interactions.push_back(
                {kind, u, item.author, static_cast<std::uint32_t>(j), ts++});
        }
    };

    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        emit(InteractionKind::forward, u, g.activity[u]);
        emit(InteractionKind::reply, u, g.activity[u] / 4);
        emit(InteractionKind::comment, u, g.activity[u] / 4);
        emit(InteractionKind::mention, u, g.activity[u] / 8);
    }
}

void generate_behaviors(Gen& g) {
    const auto& cfg = g.cfg;
    Rng rng(derive_seed(cfg.seed, "synth.behaviors"));

    // Items by dominant topic, for the on-topic half of each candidate set.
    std::vector<std::vector<std::uint32_t>> by_topic(cfg.n_topics);
    for (std::uint32_t j = 0; j < cfg.n_items; ++j) by_topic[g.item_dom[j]].push_back(j);

    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        const auto& affine = by_topic[g.pref_topic[u]];
        std::vector<bool> chosen(cfg.n_items, false);
        std::size_t added = 0;
        auto add = [&](std::uint32_t j) {
            if (chosen[j] || g.corpus.items[j].author == u) return;
            chosen[j] = true;
            g.pairs.push_back(pair_key(u, j));
            ++added;
        };
        const std::size_t half = (cfg.behaviors_per_user + 1) / 2;
        for (int attempt = 0; attempt < 8 * static_cast<int>(half) && added < half; ++attempt) {
            if (affine.empty()) break;
            add(affine[rng.below(affine.size())]);
        }
        for (int attempt = 0; attempt < 8 * static_cast<int>(cfg.behaviors_per_user);
             ++attempt) {
            if (added >= cfg.behaviors_per_user) break;
            add(static_cast<std::uint32_t>(rng.below(cfg.n_items)));
        }
    }
    std::sort(g.pairs.begin(), g.pairs.end());
    g.pairs.erase(std::unique(g.pairs.begin(), g.pairs.end()), g.pairs.end());
}

void compute_planted_distances(Gen& g) {
    const auto& cfg = g.cfg;
    Rng rng(derive_seed(cfg.seed, "synth.profiles"));

    FeatureTable normalized = normalize_features(raw_pair_table(g.corpus, g.pairs));

    // The interaction-attribute profile tracks what the user actually sees,
    // plus noise; a random point in [0,1]^5 would drown d_U in a constant
    // offset.
    g.u_pref.assign(cfg.n_users, {});
    std::vector<std::size_t> seen(cfg.n_users, 0);
    for (auto key : g.pairs) {
        std::uint32_t u = pair_user(key);
        const auto& row = normalized.at(g.corpus.items[pair_item(key)].author, u);
        for (std::size_t c = 0; c < kAttrColumns; ++c) g.u_pref[u][c] += row.v[c];
        ++seen[u];
    }
    for (std::uint32_t u = 0; u < cfg.n_users; ++u) {
        for (std::size_t c = 0; c < kAttrColumns; ++c) {
            double base = seen[u] > 0 ? g.u_pref[u][c] / static_cast<double>(seen[u]) : 0.5;
            base += 0.05 * rng.normal();
            g.u_pref[u][c] = std::clamp(base, 0.0, 1.0);
        }
    }

    g.dists.resize(g.pairs.size());
    for (std::size_t i = 0; i < g.pairs.size(); ++i) {
        std::uint32_t u = pair_user(g.pairs[i]);
        std::uint32_t j = pair_item(g.pairs[i]);
        const Item& item = g.corpus.items[j];
        const auto& row = normalized.at(item.author, u);
        NodeDistances d;
        d.d_u = kernels::squared_distance(g.u_pref[u], row.v);
        d.d_tp = kernels::squared_distance(g.tp_pref[u], item.topics);
        d.d_kw = sparse_squared_distance(g.kw_pref[u], g.item_kw[j]);
        g.dists[i] = d;
    }
}

// Draws one labeling of the component from the planted model: exhaustive
// CDF sampling when the component fits the enumeration cap, Gibbs sweeps
// otherwise.
void sample_component(const FactorGraph& graph, const Component& comp, Rng& rng,
                      std::vector<std::int8_t>& y) {
    const Params& p = graph.params();
    const auto& nodes = graph.nodes();
    const auto& edges = graph.edges();
    const std::size_t f = comp.nodes.size();

    if (f <= kMaxExactFreeVars) {
        std::vector<std::array<double, 2>> npot(f);
        for (std::size_t b = 0; b < f; ++b) {
            npot[b] = {node_log_potential(nodes[comp.nodes[b]], -1, p),
                       node_log_potential(nodes[comp.nodes[b]], 1, p)};
        }
        std::vector<std::pair<std::size_t, std::size_t>> local_edges;
        local_edges.reserve(comp.edges.size());
        for (auto ei : comp.edges) {
            const Edge& e = edges[ei];
            auto local = [&](std::uint32_t v) {
                return static_cast<std::size_t>(
                    std::lower_bound(comp.nodes.begin(), comp.nodes.end(), v) - comp.nodes.begin());
            };
            local_edges.emplace_back(local(e.node_a), local(e.node_b));
        }
        const double penalty = -4.0 * p.lambda;
        auto logw_of = [&](std::uint64_t mask) {
            double lw = 0.0;
            for (std::size_t b = 0; b < f; ++b) lw += npot[b][(mask >> b) & 1];
            for (const auto& [ba, bb] : local_edges) {
                if (((mask >> ba) & 1) != ((mask >> bb) & 1)) lw += penalty;
            }
            return lw;
        };
        const std::uint64_t total = 1ull << f;
        double max_lw = -1e300;
        for (std::uint64_t m = 0; m < total; ++m) max_lw = std::max(max_lw, logw_of(m));
        double z = 0.0;
        for (std::uint64_t m = 0; m < total; ++m) z += std::exp(logw_of(m) - max_lw);
        const double target = rng.uniform() * z;
        double acc = 0.0;
        std::uint64_t picked = total - 1;
        for (std::uint64_t m = 0; m < total; ++m) {
            acc += std::exp(logw_of(m) - max_lw);
            if (acc >= target) {
                picked = m;
                break;
            }
        }
        for (std::size_t b = 0; b < f; ++b) {
            y[comp.nodes[b]] = (picked >> b) & 1 ? 1 : -1;
        }
        return;
    }

    // Gibbs with a fixed sweep count; the planted-recovery tolerances
    // absorb the residual burn-in error.
    for (auto v : comp.nodes) {
        const double logit =
            node_log_potential(nodes[v], 1, p) - node_log_potential(nodes[v], -1, p);
        y[v] = rng.uniform() < 1.0 / (1.0 + std::exp(-logit)) ? 1 : -1;
    }
    for (int sweep = 0; sweep < kGibbsSweeps; ++sweep) {
        for (auto v : comp.nodes) {
            double logit = node_log_potential(nodes[v], 1, p) - node_log_potential(nodes[v], -1, p);
            for (auto ei : graph.incident_edges(v)) {
                const Edge& e = edges[ei];
                const std::uint32_t w = e.node_a == v ? e.node_b : e.node_a;
                logit += edge_log_potential(1, y[w], p) - edge_log_potential(-1, y[w], p);
            }
            y[v] = rng.uniform() < 1.0 / (1.0 + std::exp(-logit)) ? 1 : -1;
        }
    }
}

}  // namespace

SynthResult generate_corpus(const SynthConfig& config) {
    validate_config(config);

    Gen g(config);
    generate_users(g);
    generate_items(g);
    generate_interactions(g);
    generate_behaviors(g);
    compute_planted_distances(g);

    // The generation-side graph: same edge rule as the pipeline, but with
    // no labels yet (all influence signs positive).
    std::vector<BehaviorRef> refs(g.pairs.size());
    std::vector<BehaviorNode> nodes(g.pairs.size());
    for (std::size_t i = 0; i < g.pairs.size(); ++i) {
        refs[i] = {pair_user(g.pairs[i]), pair_item(g.pairs[i])};
        nodes[i] = {refs[i].user, refs[i].item, g.dists[i], 0};
    }
    InfluenceTable influence(g.corpus, InfluenceParams{});
    std::vector<Edge> edges = build_edges(g.corpus, refs, influence, EdgeParams{});
    FactorGraph graph(std::move(nodes), std::move(edges), config.planted);

    Rng label_rng(derive_seed(config.seed, "synth.labels"));
    std::vector<std::int8_t> y(graph.size(), 0);
    for (const auto& comp : graph.components()) {
        sample_component(graph, comp, label_rng, y);
    }

    // Reveal a known_fraction of the sampled labels as Y^K; withhold the
    // rest as truth for Y^U.
    Rng split_rng(derive_seed(config.seed, "synth.split"));
    std::vector<std::uint32_t> order(g.pairs.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    split_rng.shuffle(order);
    const auto n_known = static_cast<std::size_t>(
        std::llround(config.known_fraction * static_cast<double>(g.pairs.size())));

    SynthResult result;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const std::uint64_t key = g.pairs[order[r]];
        if (r < n_known) {
            g.corpus.labels.known.emplace(key, y[order[r]]);
        } else {
            g.corpus.labels.unknown.push_back(key);
            result.truth.emplace(key, y[order[r]]);
        }
    }
    std::sort(g.corpus.labels.unknown.begin(), g.corpus.labels.unknown.end());
    result.corpus = std::move(g.corpus);
    return result;
}

void write_synth(const SynthResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    CorpusPaths paths{dir / "users.jsonl", dir / "items.jsonl", dir / "interactions.jsonl",
                      dir / "labels.jsonl"};
    export_corpus(result.corpus, paths);

    std::ofstream out(dir / "truth.jsonl");
    if (!out) throw std::runtime_error("cannot write " + (dir / "truth.jsonl").string());
    std::vector<std::uint64_t> keys;
    keys.reserve(result.truth.size());
    for (const auto& [key, label] : result.truth) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (auto key : keys) {
        nlohmann::json rec = nlohmann::json::object();
        rec["user"] = result.corpus.users[pair_user(key)].id;
        rec["item"] = result.corpus.items[pair_item(key)].id;
        rec["y"] = static_cast<int>(result.truth.at(key));
        out << rec.dump() << '\n';
    }
}

std::unordered_map<std::uint64_t, std::int8_t> load_truth(const Corpus& corpus,
                                                          const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::unordered_map<std::uint64_t, std::int8_t> truth;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed JSON record");
        }
        auto user = corpus.user_index.find(rec.at("user").get<std::string>());
        auto item = corpus.item_index.find(rec.at("item").get<std::string>());
        if (user == corpus.user_index.end() || item == corpus.item_index.end()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": unknown user or item id");
        }
        int label = rec.at("y").get<int>();
        if (label != 1 && label != -1) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": 'y' must be 1 or -1");
        }
        truth[pair_key(user->second, item->second)] = static_cast<std::int8_t>(label);
    }
    return truth;
}

}  // namespace fgrec

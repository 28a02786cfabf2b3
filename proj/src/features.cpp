#include "fgrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fgrec/kernels.hpp"

namespace fgrec {

const char* attr_column_name(AttrColumn c) {
    switch (c) {
        case AttrColumn::GN: return "GN";
        case AttrColumn::RN: return "RN";
        case AttrColumn::CN: return "CN";
        case AttrColumn::FN: return "FN";
        case AttrColumn::MN: return "MN";
    }
    return "?";
}

PairAttributes pair_features(const Corpus& corpus, std::uint32_t subject, std::uint32_t other) {
    if (subject == other) {
        throw std::invalid_argument("pair_features: the two users must differ");
    }
    PairAttributes out;
    for (const auto& ev : corpus.interactions) {
        if (ev.target_author == subject) {
            out[AttrColumn::GN] += 1.0;
        }
        bool within_pair = (ev.actor == subject && ev.target_author == other) ||
                           (ev.actor == other && ev.target_author == subject);
        if (!within_pair) continue;
        switch (ev.kind) {
            case InteractionKind::reply: out[AttrColumn::RN] += 1.0; break;
            case InteractionKind::comment: out[AttrColumn::CN] += 1.0; break;
            case InteractionKind::forward: out[AttrColumn::FN] += 1.0; break;
            case InteractionKind::mention: out[AttrColumn::MN] += 1.0; break;
        }
    }
    return out;
}

const PairAttributes& FeatureTable::at(std::uint32_t subject, std::uint32_t other) const {
    auto it = rows.find(pair_key(subject, other));
    if (it == rows.end()) {
        throw std::out_of_range("FeatureTable: no row for the requested pair");
    }
    return it->second;
}

FeatureTable normalize_features(const FeatureTable& raw) {
    if (raw.rows.empty()) {
        throw std::invalid_argument("normalize_features: table is empty");
    }
    FeatureTable out;
    out.rows = raw.rows;

    std::vector<double> column(raw.rows.size());
    for (std::size_t c = 0; c < kAttrColumns; ++c) {
        std::size_t i = 0;
        for (const auto& [key, attrs] : raw.rows) {
            column[i++] = std::log1p(attrs.v[c]);
        }
        auto mm = kernels::min_max(column);
        const double range = mm.max - mm.min;
        for (auto& [key, attrs] : out.rows) {
            if (range <= 0.0) {
                attrs.v[c] = 0.0;
            } else {
                attrs.v[c] = (std::log1p(attrs.v[c]) - mm.min) / range;
            }
        }
    }
    return out;
}

double SparseVec::norm_squared() const {
    double acc = 0.0;
    for (const auto& [idx, w] : entries) acc += w * w;
    return acc;
}

void SparseVec::normalize_l2() {
    double n = std::sqrt(norm_squared());
    if (n <= 0.0) return;
    for (auto& [idx, w] : entries) w /= n;
}

double sparse_squared_distance(const SparseVec& a, const SparseVec& b) {
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        if (a.entries[i].first == b.entries[j].first) {
            double d = a.entries[i].second - b.entries[j].second;
            acc += d * d;
            ++i;
            ++j;
        } else if (a.entries[i].first < b.entries[j].first) {
            acc += a.entries[i].second * a.entries[i].second;
            ++i;
        } else {
            acc += b.entries[j].second * b.entries[j].second;
            ++j;
        }
    }
    for (; i < a.entries.size(); ++i) acc += a.entries[i].second * a.entries[i].second;
    for (; j < b.entries.size(); ++j) acc += b.entries[j].second * b.entries[j].second;
    return acc;
}

NodeDistances node_distances(const LatentProfile& z, std::span<const double> item_pair_attr,
                             std::span<const double> item_topics, const SparseVec& item_kw) {
    if (z.tp_vec.size() != item_topics.size()) {
        throw std::invalid_argument("node_distances: topic dimension mismatch");
    }
    NodeDistances d;
    d.d_u = kernels::squared_distance(std::span<const double>(z.u_vec), item_pair_attr);
    d.d_tp = kernels::squared_distance(std::span<const double>(z.tp_vec), item_topics);
    d.d_kw = sparse_squared_distance(z.kw_vec, item_kw);
    return d;
}

namespace {

struct PairCounts {
    std::array<std::uint64_t, 4> by_kind{};  // indexed by InteractionKind
};

// Merge-accumulate b into a (a += w * b).
void sparse_accumulate(SparseVec& a, const SparseVec& b, double w) {
    SparseVec merged;
    merged.entries.reserve(a.entries.size() + b.entries.size());
    std::size_t i = 0, j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        if (a.entries[i].first == b.entries[j].first) {
            merged.entries.emplace_back(a.entries[i].first,
                                        a.entries[i].second + w * b.entries[j].second);
            ++i;
            ++j;
        } else if (a.entries[i].first < b.entries[j].first) {
            merged.entries.push_back(a.entries[i]);
            ++i;
        } else {
            merged.entries.emplace_back(b.entries[j].first, w * b.entries[j].second);
            ++j;
        }
    }
    for (; i < a.entries.size(); ++i) merged.entries.push_back(a.entries[i]);
    for (; j < b.entries.size(); ++j) {
        merged.entries.emplace_back(b.entries[j].first, w * b.entries[j].second);
    }
    a = std::move(merged);
}

}  // namespace

FeatureTable raw_pair_table(const Corpus& corpus, std::span<const std::uint64_t> behavior_pairs) {
    std::vector<std::uint64_t> received(corpus.users.size(), 0);
    std::unordered_map<std::uint64_t, PairCounts> counts;
    for (const auto& ev : corpus.interactions) {
        received[ev.target_author] += 1;
        if (ev.actor == ev.target_author) continue;
        std::uint32_t lo = std::min(ev.actor, ev.target_author);
        std::uint32_t hi = std::max(ev.actor, ev.target_author);
        counts[pair_key(lo, hi)].by_kind[static_cast<std::size_t>(ev.kind)] += 1;
    }

    FeatureTable raw;
    for (auto key : behavior_pairs) {
        std::uint32_t user = pair_user(key);
        std::uint32_t author = corpus.items[pair_item(key)].author;
        if (author == user) {
            throw std::runtime_error("behavior pair (" + corpus.users[user].id + ", " +
                                     corpus.items[pair_item(key)].id +
                                     ") pairs a user with their own item");
        }
        std::uint64_t row_key = pair_key(author, user);
        if (raw.rows.count(row_key)) continue;
        PairAttributes attrs;
        attrs[AttrColumn::GN] = static_cast<double>(received[author]);
        std::uint32_t lo = std::min(author, user);
        std::uint32_t hi = std::max(author, user);
        if (auto it = counts.find(pair_key(lo, hi)); it != counts.end()) {
            attrs[AttrColumn::RN] =
                static_cast<double>(it->second.by_kind[static_cast<std::size_t>(InteractionKind::reply)]);
            attrs[AttrColumn::CN] =
                static_cast<double>(it->second.by_kind[static_cast<std::size_t>(InteractionKind::comment)]);
            attrs[AttrColumn::FN] =
                static_cast<double>(it->second.by_kind[static_cast<std::size_t>(InteractionKind::forward)]);
            attrs[AttrColumn::MN] =
                static_cast<double>(it->second.by_kind[static_cast<std::size_t>(InteractionKind::mention)]);
        }
        raw.rows.emplace(row_key, attrs);
    }
    return raw;
}

LatentProfile user_profile(const Corpus& corpus, const FeatureTable& normalized,
                           const std::vector<SparseVec>& item_kw, std::uint32_t user,
                           const LatentProfile* global_mean) {
    const std::uint32_t k = corpus.n_topics;

    // Liked items in Y^K, in item order for a fixed accumulation order.
    std::vector<std::uint32_t> liked;
    for (const auto& [key, y] : corpus.labels.known) {
        if (pair_user(key) == user && y > 0) liked.push_back(pair_item(key));
    }
    std::sort(liked.begin(), liked.end());

    if (liked.empty()) {
        if (global_mean) return *global_mean;
        LatentProfile neutral;
        neutral.tp_vec.assign(k, k > 0 ? 1.0 / static_cast<double>(k) : 0.0);
        return neutral;
    }

    LatentProfile p;
    p.tp_vec.assign(k, 0.0);
    for (auto item_idx : liked) {
        const Item& item = corpus.items[item_idx];
        const PairAttributes& attrs = normalized.at(item.author, user);
        for (std::size_t c = 0; c < kAttrColumns; ++c) p.u_vec[c] += attrs.v[c];
        kernels::axpy(1.0, item.topics, p.tp_vec);
        sparse_accumulate(p.kw_vec, item_kw[item_idx], 1.0);
    }
    const double inv = 1.0 / static_cast<double>(liked.size());
    for (auto& x : p.u_vec) x *= inv;
    double tp_total = kernels::sum(p.tp_vec);
    if (tp_total > 0.0) {
        kernels::scale(p.tp_vec, 1.0 / tp_total);
    } else {
        p.tp_vec.assign(k, k > 0 ? 1.0 / static_cast<double>(k) : 0.0);
    }
    p.kw_vec.normalize_l2();
    return p;
}

FeatureSet compute_features(const Corpus& corpus, const FeatureOptions& opts) {
    FeatureSet fs;
    fs.pairs = corpus.behavior_pairs();

    // Keyword vocabulary in first-appearance order.
    for (const auto& item : corpus.items) {
        for (const auto& kw : item.keywords) {
            fs.vocab.emplace(kw.term, static_cast<std::uint32_t>(fs.vocab.size()));
        }
    }
    fs.item_kw.resize(corpus.items.size());
    for (std::size_t i = 0; i < corpus.items.size(); ++i) {
        SparseVec& v = fs.item_kw[i];
        for (const auto& kw : corpus.items[i].keywords) {
            v.entries.emplace_back(fs.vocab.at(kw.term), kw.weight);
        }
        std::sort(v.entries.begin(), v.entries.end());
        if (opts.zero_d_kw) v.entries.clear();
    }

    FeatureTable raw = raw_pair_table(corpus, fs.pairs);
    if (opts.zero_column) {
        for (auto& [key, attrs] : raw.rows) attrs[*opts.zero_column] = 0.0;
    }

    if (!raw.rows.empty()) {
        fs.normalized = normalize_features(raw);
    }

    // Profiles: first pass over users with positives, then the global mean
    // for cold users.
    fs.profiles.resize(corpus.users.size());
    std::vector<bool> cold(corpus.users.size(), true);
    for (const auto& [key, y] : corpus.labels.known) {
        if (y > 0) cold[pair_user(key)] = false;
    }
    LatentProfile mean;
    mean.tp_vec.assign(corpus.n_topics, 0.0);
    std::size_t warm = 0;
    for (std::uint32_t u = 0; u < corpus.users.size(); ++u) {
        if (cold[u]) continue;
        fs.profiles[u] = user_profile(corpus, fs.normalized, fs.item_kw, u, nullptr);
        for (std::size_t c = 0; c < kAttrColumns; ++c) mean.u_vec[c] += fs.profiles[u].u_vec[c];
        kernels::axpy(1.0, fs.profiles[u].tp_vec, mean.tp_vec);
        sparse_accumulate(mean.kw_vec, fs.profiles[u].kw_vec, 1.0);
        ++warm;
    }
    if (warm > 0) {
        const double inv = 1.0 / static_cast<double>(warm);
        for (auto& x : mean.u_vec) x *= inv;
        kernels::scale(mean.tp_vec, inv);
        double tp_total = kernels::sum(mean.tp_vec);
        if (tp_total > 0.0) kernels::scale(mean.tp_vec, 1.0 / tp_total);
        for (auto& [idx, w] : mean.kw_vec.entries) w *= inv;
    } else if (corpus.n_topics > 0) {
        mean.tp_vec.assign(corpus.n_topics, 1.0 / static_cast<double>(corpus.n_topics));
    }
    for (std::uint32_t u = 0; u < corpus.users.size(); ++u) {
        if (cold[u]) fs.profiles[u] = mean;
    }

    // Distances per behavior pair.
    fs.distances.resize(fs.pairs.size());
    for (std::size_t i = 0; i < fs.pairs.size(); ++i) {
        std::uint64_t key = fs.pairs[i];
        std::uint32_t user = pair_user(key);
        std::uint32_t item_idx = pair_item(key);
        const Item& item = corpus.items[item_idx];
        const PairAttributes& x_attrs = fs.normalized.at(item.author, user);
        NodeDistances d = node_distances(fs.profiles[user], x_attrs.v, item.topics,
                                         fs.item_kw[item_idx]);
        if (opts.zero_d_tp) d.d_tp = 0.0;
        if (opts.zero_d_kw) d.d_kw = 0.0;
        fs.distances[i] = d;
    }

    return fs;
}

}  // namespace fgrec

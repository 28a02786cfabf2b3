#pragma once
// Per-pair interaction attributes, user latent profiles and the three
// squared distances consumed by the node factors. Profiles are computed
// once from the known labels and held fixed afterwards.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "fgrec/corpus.hpp"

namespace fgrec {

// Attribute columns, in storage order.
enum class AttrColumn : std::uint8_t { GN = 0, RN = 1, CN = 2, FN = 3, MN = 4 };
constexpr std::size_t kAttrColumns = 5;

const char* attr_column_name(AttrColumn c);

struct PairAttributes {
    // GN: engagement events received by the first user from anyone;
    // RN/CN/FN/MN: per-kind counts between the two users, both directions.
    std::array<double, kAttrColumns> v{};

    double& operator[](AttrColumn c) { return v[static_cast<std::size_t>(c)]; }
    double operator[](AttrColumn c) const { return v[static_cast<std::size_t>(c)]; }
};

// Raw event counts for the (subject, other) pair. Throws if subject == other.
PairAttributes pair_features(const Corpus& corpus, std::uint32_t subject, std::uint32_t other);

// Table of pair attributes keyed by (subject, other) packed as pair_key.
struct FeatureTable {
    std::unordered_map<std::uint64_t, PairAttributes> rows;

    const PairAttributes& at(std::uint32_t subject, std::uint32_t other) const;
};

// Raw rows for every (item author, user) pair the behavior pairs touch,
// assembled in one pass over the interaction log; agrees with
// pair_features row by row.
FeatureTable raw_pair_table(const Corpus& corpus, std::span<const std::uint64_t> behavior_pairs);

// log1p then per-column min-max into [0,1]; constant columns map to 0.
FeatureTable normalize_features(const FeatureTable& raw);

// Sparse nonnegative vector over the keyword vocabulary, entries sorted by
// term index.
struct SparseVec {
    std::vector<std::pair<std::uint32_t, double>> entries;

    double norm_squared() const;
    void normalize_l2();
};

double sparse_squared_distance(const SparseVec& a, const SparseVec& b);

struct LatentProfile {
    std::array<double, kAttrColumns> u_vec{};
    std::vector<double> tp_vec;
    SparseVec kw_vec;
};

struct NodeDistances {
    double d_u = 0.0;
    double d_tp = 0.0;
    double d_kw = 0.0;
};

// Squared distances between a user profile and one item's features as seen
// by that user. Throws on topic dimension mismatch.
NodeDistances node_distances(const LatentProfile& z, std::span<const double> item_pair_attr,
                             std::span<const double> item_topics, const SparseVec& item_kw);

// Feature ablation switches (all off = full model).
struct FeatureOptions {
    std::optional<AttrColumn> zero_column;  // zero one raw attribute column
    bool zero_d_tp = false;                 // force d_TP = 0
    bool zero_d_kw = false;                 // force d_KW = 0
};

// Everything the graph builder needs, computed for every behavior pair.
struct FeatureSet {
    std::vector<std::uint64_t> pairs;        // behavior pairs, known then unknown
    std::vector<NodeDistances> distances;    // aligned with pairs
    FeatureTable normalized;                 // (author, user) rows
    std::vector<LatentProfile> profiles;     // per user
    std::unordered_map<std::string, std::uint32_t> vocab;
    std::vector<SparseVec> item_kw;          // per item, vocab-indexed
};

FeatureSet compute_features(const Corpus& corpus, const FeatureOptions& opts = {});

// Profile of one user from its Y^K positives; cold users fall back to the
// supplied global mean.
LatentProfile user_profile(const Corpus& corpus, const FeatureTable& normalized,
                           const std::vector<SparseVec>& item_kw, std::uint32_t user,
                           const LatentProfile* global_mean);

}  // namespace fgrec

#pragma once
// Corpus data model and JSONL ingestion. A loaded Corpus is immutable and
// fully cross-referenced: every id in items, interactions and labels
// resolves to a dense index.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fgrec {

// Packs a (user, item) index pair into one map key.
inline std::uint64_t pair_key(std::uint32_t user, std::uint32_t item) {
    return (static_cast<std::uint64_t>(user) << 32) | item;
}
inline std::uint32_t pair_user(std::uint64_t key) { return static_cast<std::uint32_t>(key >> 32); }
inline std::uint32_t pair_item(std::uint64_t key) { return static_cast<std::uint32_t>(key & 0xffffffffu); }

struct User {
    std::string id;
    std::vector<std::uint32_t> followees;
};

struct Keyword {
    std::string term;
    double weight = 0.0;
};

struct Item {
    std::string id;
    std::uint32_t author = 0;
    std::vector<Keyword> keywords;  // at most 3
    std::vector<double> topics;     // probability vector over K topics
    std::int64_t timestamp = 0;     // stored, not consumed by the model
};

enum class InteractionKind : std::uint8_t { reply = 0, comment = 1, forward = 2, mention = 3 };

const char* interaction_kind_name(InteractionKind k);
std::optional<InteractionKind> parse_interaction_kind(const std::string& s);

struct Interaction {
    InteractionKind kind = InteractionKind::reply;
    std::uint32_t actor = 0;
    std::uint32_t target_author = 0;
    std::uint32_t item = 0;
    std::int64_t timestamp = 0;
};

struct LabelSet {
    std::unordered_map<std::uint64_t, std::int8_t> known;  // pair -> +1/-1
    std::vector<std::uint64_t> unknown;                    // sorted pair keys
    bool is_unknown(std::uint64_t key) const;
};

struct Corpus {
    std::vector<User> users;
    std::vector<Item> items;
    std::vector<Interaction> interactions;
    LabelSet labels;
    std::unordered_map<std::string, std::uint32_t> user_index;
    std::unordered_map<std::string, std::uint32_t> item_index;
    std::uint32_t n_topics = 0;

    std::size_t behavior_count() const { return labels.known.size() + labels.unknown.size(); }
    // All behavior pairs (known then unknown), each list sorted by pair key.
    std::vector<std::uint64_t> behavior_pairs() const;
};

bool operator==(const Corpus& a, const Corpus& b);

struct CorpusPaths {
    std::filesystem::path users;
    std::filesystem::path items;
    std::filesystem::path interactions;
    std::filesystem::path labels;
};

Corpus load_corpus(const CorpusPaths& paths);

// Writes the corpus back out in the same JSONL formats; reloading the
// result yields an equal corpus.
void export_corpus(const Corpus& corpus, const CorpusPaths& paths);

struct ValidationReport {
    std::vector<std::string> violations;  // type-invariant breaches
    std::vector<std::string> warnings;    // zero-keyword items, idle users
    bool empty() const { return violations.empty(); }
};

ValidationReport validate_corpus(const Corpus& corpus);

}  // namespace fgrec

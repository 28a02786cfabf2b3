#include "fgrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fgrec {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& msg) {
    std::ostringstream os;
    os << path.string() << ":" << line_no << ": " << msg;
    fail(os.str());
}

// Calls fn(line_no, parsed_json) for every non-empty line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            fail_line(path, line_no, "malformed JSON record");
        }
        fn(line_no, rec);
    }
}

std::uint32_t require_user(const Corpus& c, const std::string& id,
                           const std::filesystem::path& path, std::size_t line_no) {
    auto it = c.user_index.find(id);
    if (it == c.user_index.end()) fail_line(path, line_no, "unknown user id '" + id + "'");
    return it->second;
}

std::uint32_t require_item(const Corpus& c, const std::string& id,
                           const std::filesystem::path& path, std::size_t line_no) {
    auto it = c.item_index.find(id);
    if (it == c.item_index.end()) fail_line(path, line_no, "unknown item id '" + id + "'");
    return it->second;
}

template <typename T>
T field(const json& rec, const char* name, const std::filesystem::path& path,
        std::size_t line_no) {
    auto it = rec.find(name);
    if (it == rec.end()) fail_line(path, line_no, std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        fail_line(path, line_no, std::string("field '") + name + "' has the wrong type");
    }
}

}  // namespace

const char* interaction_kind_name(InteractionKind k) {
    switch (k) {
        case InteractionKind::reply: return "reply";
        case InteractionKind::comment: return "comment";
        case InteractionKind::forward: return "forward";
        case InteractionKind::mention: return "mention";
    }
    return "?";
}

std::optional<InteractionKind> parse_interaction_kind(const std::string& s) {
    if (s == "reply") return InteractionKind::reply;
    if (s == "comment") return InteractionKind::comment;
    if (s == "forward") return InteractionKind::forward;
    if (s == "mention") return InteractionKind::mention;
    return std::nullopt;
}

bool LabelSet::is_unknown(std::uint64_t key) const {
    return std::binary_search(unknown.begin(), unknown.end(), key);
}

std::vector<std::uint64_t> Corpus::behavior_pairs() const {
    std::vector<std::uint64_t> pairs;
    pairs.reserve(behavior_count());
    for (const auto& [key, y] : labels.known) pairs.push_back(key);
    std::sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(labels.known.size()));
    pairs.insert(pairs.end(), labels.unknown.begin(), labels.unknown.end());
    return pairs;
}

Corpus load_corpus(const CorpusPaths& paths) {
    Corpus c;

    for_each_record(paths.users, [&](std::size_t line_no, const json& rec) {
        User u;
        u.id = field<std::string>(rec, "id", paths.users, line_no);
        if (c.user_index.count(u.id)) {
            fail_line(paths.users, line_no, "duplicate user id '" + u.id + "'");
        }
        c.user_index.emplace(u.id, static_cast<std::uint32_t>(c.users.size()));
        c.users.push_back(std::move(u));
    });
    // Followees resolved in a second pass so forward references work.
    {
        std::size_t row = 0;
        for_each_record(paths.users, [&](std::size_t line_no, const json& rec) {
            auto ids = field<std::vector<std::string>>(rec, "followees", paths.users, line_no);
            User& u = c.users[row++];
            u.followees.reserve(ids.size());
            for (const auto& fid : ids) {
                u.followees.push_back(require_user(c, fid, paths.users, line_no));
            }
        });
    }

    for_each_record(paths.items, [&](std::size_t line_no, const json& rec) {
        Item item;
        item.id = field<std::string>(rec, "id", paths.items, line_no);
        if (c.item_index.count(item.id)) {
            fail_line(paths.items, line_no, "duplicate item id '" + item.id + "'");
        }
        item.author = require_user(c, field<std::string>(rec, "author", paths.items, line_no),
                                   paths.items, line_no);
        auto kw = rec.find("kw");
        if (kw == rec.end() || !kw->is_array()) fail_line(paths.items, line_no, "missing field 'kw'");
        if (kw->size() > 3) {
            fail_line(paths.items, line_no,
                      "item '" + item.id + "' has " + std::to_string(kw->size()) +
                          " keywords (at most 3 allowed)");
        }
        for (const auto& entry : *kw) {
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
                !entry[1].is_number()) {
                fail_line(paths.items, line_no, "keyword entries must be [term, weight] pairs");
            }
            item.keywords.push_back({entry[0].get<std::string>(), entry[1].get<double>()});
        }
        item.topics = field<std::vector<double>>(rec, "tp", paths.items, line_no);
        if (item.topics.empty()) fail_line(paths.items, line_no, "empty topic vector");
        if (c.n_topics == 0) {
            c.n_topics = static_cast<std::uint32_t>(item.topics.size());
        } else if (item.topics.size() != c.n_topics) {
            fail_line(paths.items, line_no, "topic vector length differs from earlier items");
        }
        item.timestamp = field<std::int64_t>(rec, "ts", paths.items, line_no);
        c.item_index.emplace(item.id, static_cast<std::uint32_t>(c.items.size()));
        c.items.push_back(std::move(item));
    });

    for_each_record(paths.interactions, [&](std::size_t line_no, const json& rec) {
        Interaction ev;
        auto kind = parse_interaction_kind(field<std::string>(rec, "kind", paths.interactions, line_no));
        if (!kind) fail_line(paths.interactions, line_no, "unknown interaction kind");
        ev.kind = *kind;
        ev.actor = require_user(c, field<std::string>(rec, "actor", paths.interactions, line_no),
                                paths.interactions, line_no);
        ev.target_author =
            require_user(c, field<std::string>(rec, "target_author", paths.interactions, line_no),
                         paths.interactions, line_no);
        ev.item = require_item(c, field<std::string>(rec, "item", paths.interactions, line_no),
                               paths.interactions, line_no);
        ev.timestamp = field<std::int64_t>(rec, "ts", paths.interactions, line_no);
        c.interactions.push_back(ev);
    });

    for_each_record(paths.labels, [&](std::size_t line_no, const json& rec) {
        std::uint32_t user = require_user(c, field<std::string>(rec, "user", paths.labels, line_no),
                                          paths.labels, line_no);
        std::uint32_t item = require_item(c, field<std::string>(rec, "item", paths.labels, line_no),
                                          paths.labels, line_no);
        std::uint64_t key = pair_key(user, item);
        auto y = rec.find("y");
        if (y == rec.end()) fail_line(paths.labels, line_no, "missing field 'y'");
        bool duplicate = c.labels.known.count(key) ||
                         std::find(c.labels.unknown.begin(), c.labels.unknown.end(), key) !=
                             c.labels.unknown.end();
        if (duplicate) {
            fail_line(paths.labels, line_no,
                      "duplicate label for pair (" + c.users[user].id + ", " + c.items[item].id + ")");
        }
        if (y->is_null()) {
            c.labels.unknown.push_back(key);
        } else if (y->is_number_integer() &&
                   (y->get<int>() == 1 || y->get<int>() == -1)) {
            c.labels.known.emplace(key, static_cast<std::int8_t>(y->get<int>()));
        } else {
            fail_line(paths.labels, line_no, "'y' must be 1, -1 or null");
        }
    });
    std::sort(c.labels.unknown.begin(), c.labels.unknown.end());

    return c;
}

void export_corpus(const Corpus& corpus, const CorpusPaths& paths) {
    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p);
        if (!out) fail("cannot write " + p.string());
        return out;
    };

    {
        auto out = open(paths.users);
        for (const auto& u : corpus.users) {
            json rec = json::object();
            rec["id"] = u.id;
            json ids = json::array();
            for (auto f : u.followees) ids.push_back(corpus.users[f].id);
            rec["followees"] = std::move(ids);
            out << rec.dump() << '\n';
        }
    }
    {
        auto out = open(paths.items);
        for (const auto& item : corpus.items) {
            json rec = json::object();
            rec["id"] = item.id;
            rec["author"] = corpus.users[item.author].id;
            json kw = json::array();
            for (const auto& k : item.keywords) kw.push_back(json::array({k.term, k.weight}));
            rec["kw"] = std::move(kw);
            rec["tp"] = item.topics;
            rec["ts"] = item.timestamp;
            out << rec.dump() << '\n';
        }
    }
    {
        auto out = open(paths.interactions);
        for (const auto& ev : corpus.interactions) {
            json rec = json::object();
            rec["kind"] = interaction_kind_name(ev.kind);
            rec["actor"] = corpus.users[ev.actor].id;
            rec["target_author"] = corpus.users[ev.target_author].id;
            rec["item"] = corpus.items[ev.item].id;
            rec["ts"] = ev.timestamp;
            out << rec.dump() << '\n';
        }
    }
    {
        auto out = open(paths.labels);
        std::vector<std::uint64_t> known_keys;
        known_keys.reserve(corpus.labels.known.size());
        for (const auto& [key, y] : corpus.labels.known) known_keys.push_back(key);
        std::sort(known_keys.begin(), known_keys.end());
        auto write = [&](std::uint64_t key, const json& y) {
            json rec = json::object();
            rec["user"] = corpus.users[pair_user(key)].id;
            rec["item"] = corpus.items[pair_item(key)].id;
            rec["y"] = y;
            out << rec.dump() << '\n';
        };
        for (auto key : known_keys) write(key, corpus.labels.known.at(key));
        for (auto key : corpus.labels.unknown) write(key, nullptr);
    }
}

bool operator==(const Corpus& a, const Corpus& b) {
    if (a.users.size() != b.users.size() || a.items.size() != b.items.size() ||
        a.interactions.size() != b.interactions.size() || a.n_topics != b.n_topics) {
        return false;
    }
    for (std::size_t i = 0; i < a.users.size(); ++i) {
        if (a.users[i].id != b.users[i].id || a.users[i].followees != b.users[i].followees) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        const Item& x = a.items[i];
        const Item& y = b.items[i];
        if (x.id != y.id || x.author != y.author || x.topics != y.topics ||
            x.timestamp != y.timestamp || x.keywords.size() != y.keywords.size()) {
            return false;
        }
        for (std::size_t k = 0; k < x.keywords.size(); ++k) {
            if (x.keywords[k].term != y.keywords[k].term ||
                x.keywords[k].weight != y.keywords[k].weight) {
                return false;
            }
        }
    }
    for (std::size_t i = 0; i < a.interactions.size(); ++i) {
        const Interaction& x = a.interactions[i];
        const Interaction& y = b.interactions[i];
        if (x.kind != y.kind || x.actor != y.actor || x.target_author != y.target_author ||
            x.item != y.item || x.timestamp != y.timestamp) {
            return false;
        }
    }
    return a.labels.known == b.labels.known && a.labels.unknown == b.labels.unknown;
}

ValidationReport validate_corpus(const Corpus& corpus) {
    ValidationReport report;
    auto violation = [&](const std::string& msg) { report.violations.push_back(msg); };

    for (const auto& u : corpus.users) {
        for (auto f : u.followees) {
            if (corpus.users[f].id == u.id) {
                violation("user '" + u.id + "' follows itself");
            }
        }
    }

    for (const auto& item : corpus.items) {
        double total = 0.0;
        bool negative = false;
        for (double t : item.topics) {
            total += t;
            if (t < 0.0) negative = true;
        }
        if (negative) violation("item '" + item.id + "' has a negative topic weight");
        if (std::fabs(total - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "item '" << item.id << "' topic vector sums to " << total << " (expected 1)";
            violation(os.str());
        }
        if (item.keywords.size() > 3) {
            violation("item '" + item.id + "' has " + std::to_string(item.keywords.size()) +
                      " keywords (at most 3 allowed)");
        }
        for (const auto& k : item.keywords) {
            if (k.weight < 0.0) {
                violation("item '" + item.id + "' keyword '" + k.term + "' has negative weight");
            }
        }
        if (item.keywords.empty()) {
            report.warnings.push_back("item '" + item.id + "' has no keywords");
        }
    }

    std::vector<bool> active(corpus.users.size(), false);
    for (const auto& ev : corpus.interactions) {
        active[ev.actor] = true;
        active[ev.target_author] = true;
    }
    for (std::size_t i = 0; i < corpus.users.size(); ++i) {
        if (!active[i]) {
            report.warnings.push_back("user '" + corpus.users[i].id + "' has no interactions");
        }
    }

    return report;
}

}  // namespace fgrec

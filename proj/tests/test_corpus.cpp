#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <string>

#include "fgrec/corpus.hpp"
#include "test_util.hpp"

using namespace fgrec;

namespace {

struct Fixture {
    std::filesystem::path dir;
    CorpusPaths paths;

    Fixture() : dir(testutil::fresh_dir("corpus")) {
        paths = {dir / "users.jsonl", dir / "items.jsonl", dir / "interactions.jsonl",
                 dir / "labels.jsonl"};
    }
    ~Fixture() { std::filesystem::remove_all(dir); }

    void write(const std::filesystem::path& p, const std::string& content) const {
        std::ofstream out(p);
        out << content;
    }
    void write_all(const std::string& users, const std::string& items,
                   const std::string& interactions, const std::string& labels) const {
        write(paths.users, users);
        write(paths.items, items);
        write(paths.interactions, interactions);
        write(paths.labels, labels);
    }
};

const char* kUsers = R"({"id": "u1", "followees": ["u2"]}
{"id": "u2", "followees": []}
)";
const char* kItems = R"({"id": "i1", "author": "u2", "kw": [["alpha", 0.5], ["beta", 0.3]], "tp": [0.75, 0.25], "ts": 100}
{"id": "i2", "author": "u1", "kw": [["beta", 1.0]], "tp": [0.5, 0.5], "ts": 101}
)";
const char* kInteractions = R"({"kind": "forward", "actor": "u1", "target_author": "u2", "item": "i1", "ts": 102}
{"kind": "reply", "actor": "u2", "target_author": "u1", "item": "i2", "ts": 103}
)";
const char* kLabels = R"({"user": "u1", "item": "i1", "y": 1}
{"user": "u2", "item": "i2", "y": null}
)";

}  // namespace

TEST_CASE("empty files load to an empty corpus") {
    Fixture fx;
    fx.write_all("", "", "", "");
    Corpus c = load_corpus(fx.paths);
    CHECK(c.users.empty());
    CHECK(c.items.empty());
    CHECK(c.interactions.empty());
    CHECK(c.labels.known.empty());
    CHECK(c.labels.unknown.empty());
    CHECK(c.behavior_count() == 0);
}

TEST_CASE("a small corpus loads fully cross-referenced") {
    Fixture fx;
    fx.write_all(kUsers, kItems, kInteractions, kLabels);
    Corpus c = load_corpus(fx.paths);
    CHECK(c.users.size() == 2);
    CHECK(c.items.size() == 2);
    CHECK(c.interactions.size() == 2);
    CHECK(c.labels.known.size() == 1);
    CHECK(c.labels.unknown.size() == 1);
    CHECK(c.n_topics == 2);
    CHECK(c.users[0].followees == std::vector<std::uint32_t>{1});
    CHECK(c.items[c.item_index.at("i1")].author == c.user_index.at("u2"));
    CHECK(c.labels.known.at(pair_key(0, 0)) == 1);
}

TEST_CASE("export then reload round-trips to an equal corpus") {
    Fixture fx;
    fx.write_all(kUsers, kItems, kInteractions, kLabels);
    Corpus c = load_corpus(fx.paths);

    auto dir2 = testutil::fresh_dir("corpus_rt");
    CorpusPaths paths2{dir2 / "users.jsonl", dir2 / "items.jsonl", dir2 / "interactions.jsonl",
                       dir2 / "labels.jsonl"};
    export_corpus(c, paths2);
    Corpus c2 = load_corpus(paths2);
    CHECK(c == c2);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("malformed line errors carry the line number") {
    Fixture fx;
    fx.write_all("{\"id\": \"u1\", \"followees\": []}\nnot json\n", "", "", "");
    try {
        load_corpus(fx.paths);
        FAIL("expected a parse error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("dangling references name the offending id") {
    Fixture fx;
    fx.write_all(kUsers, kItems, kInteractions,
                 "{\"user\": \"u9\", \"item\": \"i1\", \"y\": 1}\n");
    try {
        load_corpus(fx.paths);
        FAIL("expected a dangling-reference error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("u9") != std::string::npos);
    }
}

TEST_CASE("conflicting labels for one pair are rejected") {
    Fixture fx;
    fx.write_all(kUsers, kItems, kInteractions,
                 "{\"user\": \"u1\", \"item\": \"i1\", \"y\": 1}\n"
                 "{\"user\": \"u1\", \"item\": \"i1\", \"y\": -1}\n");
    CHECK_THROWS_WITH_AS(load_corpus(fx.paths),
                         doctest::Contains("duplicate label"), std::runtime_error);
}

TEST_CASE("duplicate ids and oversize keyword lists are rejected at load") {
    Fixture fx;
    fx.write_all("{\"id\": \"u1\", \"followees\": []}\n{\"id\": \"u1\", \"followees\": []}\n", "",
                 "", "");
    CHECK_THROWS_WITH_AS(load_corpus(fx.paths), doctest::Contains("duplicate user id"),
                         std::runtime_error);

    fx.write_all(kUsers,
                 "{\"id\": \"i1\", \"author\": \"u1\", \"kw\": [[\"a\",1],[\"b\",1],[\"c\",1],[\"d\",1]], "
                 "\"tp\": [1.0], \"ts\": 0}\n",
                 "", "");
    CHECK_THROWS_WITH_AS(load_corpus(fx.paths), doctest::Contains("keywords"),
                         std::runtime_error);
}

TEST_CASE("validation flags value-level invariant breaches") {
    Fixture fx;
    fx.write_all(kUsers, kItems, kInteractions, kLabels);
    Corpus c = load_corpus(fx.paths);
    CHECK(validate_corpus(c).empty());

    SUBCASE("topic vector off the simplex") {
        c.items[0].topics = {0.5, 0.6};
        auto report = validate_corpus(c);
        CHECK_FALSE(report.empty());
        CHECK(report.violations[0].find("topic") != std::string::npos);
    }
    SUBCASE("keyword cardinality violation on an in-memory corpus") {
        c.items[0].keywords = {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 1.0}};
        auto report = validate_corpus(c);
        CHECK_FALSE(report.empty());
        CHECK(report.violations[0].find("keywords") != std::string::npos);
    }
    SUBCASE("zero-keyword items and idle users are warnings, not violations") {
        c.items[0].keywords.clear();
        auto report = validate_corpus(c);
        CHECK(report.empty());
        CHECK_FALSE(report.warnings.empty());
    }
}

TEST_CASE("table-1 scale cardinalities parse to exact counts") {
    // 1,100 users, 292,316 known + 165,053 unknown behaviors distributed
    // over 420 items; only the shape matters, the content is synthetic.
    Fixture fx;
    const int n_users = 1100;
    const int n_items = 420;
    const long known_target = 292316;
    const long unknown_target = 165053;
    {
        std::ofstream users(fx.paths.users);
        for (int u = 0; u < n_users; ++u) {
            users << "{\"id\": \"u" << u << "\", \"followees\": []}\n";
        }
        std::ofstream items(fx.paths.items);
        for (int i = 0; i < n_items; ++i) {
            items << "{\"id\": \"i" << i << "\", \"author\": \"u" << (i % n_users)
                  << "\", \"kw\": [[\"k\", 1.0]], \"tp\": [1.0], \"ts\": " << i << "}\n";
        }
        std::ofstream inter(fx.paths.interactions);
        std::ofstream labels(fx.paths.labels);
        long written = 0;
        for (int u = 0; u < n_users && written < known_target + unknown_target; ++u) {
            for (int i = 0; i < n_items && written < known_target + unknown_target; ++i) {
                if (u == i % n_users) continue;  // skip self-authored pairs
                labels << "{\"user\": \"u" << u << "\", \"item\": \"i" << i << "\", \"y\": ";
                if (written < known_target) {
                    labels << (written % 2 == 0 ? "1" : "-1");
                } else {
                    labels << "null";
                }
                labels << "}\n";
                ++written;
            }
        }
        REQUIRE(written == known_target + unknown_target);
    }
    Corpus c = load_corpus(fx.paths);
    CHECK(c.users.size() == 1100);
    CHECK(c.labels.known.size() == 292316);
    CHECK(c.labels.unknown.size() == 165053);
}

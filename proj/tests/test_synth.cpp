#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fgrec/synth.hpp"
#include "test_util.hpp"

using namespace fgrec;

namespace {

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.n_users = 60;
    cfg.n_items = 240;
    cfg.n_topics = 4;
    cfg.vocab_size = 120;
    cfg.behaviors_per_user = 12;
    cfg.seed = 7;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("riemann zeta agrees with closed forms") {
    CHECK(riemann_zeta(2.0) ==
          doctest::Approx(3.141592653589793 * 3.141592653589793 / 6.0).epsilon(1e-12));
    CHECK(riemann_zeta(4.0) == doctest::Approx(std::pow(3.141592653589793, 4) / 90.0).epsilon(1e-12));
    CHECK(riemann_zeta(1.5) == doctest::Approx(2.612375348685488).epsilon(1e-9));
    CHECK_THROWS(riemann_zeta(1.0));
}

TEST_CASE("fit_power_law") {
    SUBCASE("recovers the generating exponent") {
        Rng rng(201);
        std::vector<std::uint64_t> counts(10000);
        for (auto& c : counts) c = rng.zipf(2.0);
        double alpha = fit_power_law(counts);
        CHECK(alpha == doctest::Approx(2.0).epsilon(0.1));
        CHECK(std::fabs(alpha - 2.0) <= 0.2);
    }
    SUBCASE("works across exponents") {
        Rng rng(203);
        for (double truth : {1.6, 2.5, 3.2}) {
            std::vector<std::uint64_t> counts(20000);
            for (auto& c : counts) c = rng.zipf(truth);
            CHECK(std::fabs(fit_power_law(counts) - truth) <= 0.15);
        }
    }
    SUBCASE("degenerate inputs are rejected") {
        std::vector<std::uint64_t> equal(100, 5);
        CHECK_THROWS_WITH_AS(fit_power_law(equal), doctest::Contains("degenerate"),
                             std::invalid_argument);
        std::vector<std::uint64_t> few{1, 2, 3};
        CHECK_THROWS(fit_power_law(few));
        std::vector<std::uint64_t> zero(100, 0);
        CHECK_THROWS(fit_power_law(zero));
    }
    SUBCASE("doubling counts and x_min leaves the estimate unchanged") {
        Rng rng(205);
        std::vector<std::uint64_t> counts(5000);
        for (auto& c : counts) c = rng.zipf(2.2);
        std::vector<std::uint64_t> doubled(counts);
        for (auto& c : doubled) c *= 2;
        // Identical log-ratio samples, so the fits agree exactly.
        CHECK(fit_power_law(counts, 1.0) == fit_power_law(doubled, 2.0));
    }
}

TEST_CASE("generation is deterministic per seed") {
    SynthConfig cfg = small_config();
    SynthResult a = generate_corpus(cfg);
    SynthResult b = generate_corpus(cfg);
    CHECK(a.corpus == b.corpus);
    CHECK(a.truth == b.truth);

    auto dir_a = testutil::fresh_dir("synth_a");
    auto dir_b = testutil::fresh_dir("synth_b");
    write_synth(a, dir_a);
    write_synth(b, dir_b);
    for (const char* name :
         {"users.jsonl", "items.jsonl", "interactions.jsonl", "labels.jsonl", "truth.jsonl"}) {
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);

    cfg.seed = 8;
    SynthResult c = generate_corpus(cfg);
    CHECK_FALSE(a.corpus == c.corpus);
}

TEST_CASE("the written corpus loads back and satisfies validation") {
    SynthResult r = generate_corpus(small_config());
    auto dir = testutil::fresh_dir("synth_load");
    write_synth(r, dir);
    Corpus loaded = load_corpus({dir / "users.jsonl", dir / "items.jsonl",
                                 dir / "interactions.jsonl", dir / "labels.jsonl"});
    CHECK(loaded == r.corpus);
    CHECK(validate_corpus(loaded).violations.empty());
    auto truth = load_truth(loaded, dir / "truth.jsonl");
    CHECK(truth.size() == r.truth.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("known/unknown split matches the configured fraction and is disjoint") {
    SynthConfig cfg = small_config();
    cfg.known_fraction = 0.64;
    SynthResult r = generate_corpus(cfg);
    const std::size_t total = r.corpus.behavior_count();
    const auto expected_known =
        static_cast<std::size_t>(std::llround(0.64 * static_cast<double>(total)));
    CHECK(r.corpus.labels.known.size() == expected_known);
    CHECK(r.corpus.labels.unknown.size() == total - expected_known);
    CHECK(r.truth.size() == r.corpus.labels.unknown.size());
    for (auto key : r.corpus.labels.unknown) {
        CHECK(r.corpus.labels.known.count(key) == 0);
        CHECK(r.truth.count(key) == 1);
    }
}

TEST_CASE("a zero planted model produces a balanced coin") {
    SynthConfig cfg;
    cfg.n_users = 500;
    cfg.n_items = 1500;
    cfg.n_topics = 4;
    cfg.vocab_size = 200;
    cfg.behaviors_per_user = 25;
    cfg.planted = Params{0, 0, 0, 0};
    cfg.seed = 11;
    SynthResult r = generate_corpus(cfg);
    std::size_t total = 0, positive = 0;
    for (const auto& [key, y] : r.corpus.labels.known) {
        ++total;
        if (y > 0) ++positive;
    }
    for (const auto& [key, y] : r.truth) {
        ++total;
        if (y > 0) ++positive;
    }
    REQUIRE(total >= 10000);
    const double freq = static_cast<double>(positive) / static_cast<double>(total);
    CHECK(freq == doctest::Approx(0.5).epsilon(0.04));
    CHECK(std::fabs(freq - 0.5) <= 0.02);
}

TEST_CASE("forwarding activity follows the configured power law") {
    SynthConfig cfg;
    cfg.n_users = 1200;
    cfg.n_items = 2000;
    cfg.n_topics = 4;
    cfg.vocab_size = 200;
    cfg.behaviors_per_user = 4;
    cfg.powerlaw_exponent = 2.0;
    cfg.seed = 13;
    SynthResult r = generate_corpus(cfg);

    std::vector<std::uint64_t> forwards(cfg.n_users, 0);
    for (const auto& ev : r.corpus.interactions) {
        if (ev.kind == InteractionKind::forward) ++forwards[ev.actor];
    }
    std::vector<std::uint64_t> counts;
    for (auto f : forwards) {
        if (f > 0) counts.push_back(f);
    }
    REQUIRE(counts.size() >= 1000);
    CHECK(std::fabs(fit_power_law(counts) - 2.0) <= 0.2);
}

TEST_CASE("infeasible configs are rejected") {
    SynthConfig cfg = small_config();
    cfg.known_fraction = 1.0;
    CHECK_THROWS(generate_corpus(cfg));
    cfg = small_config();
    cfg.powerlaw_exponent = 1.0;
    CHECK_THROWS(generate_corpus(cfg));
    cfg = small_config();
    cfg.vocab_size = 2;
    CHECK_THROWS(generate_corpus(cfg));
    cfg = small_config();
    cfg.n_users = 1;
    CHECK_THROWS(generate_corpus(cfg));
}

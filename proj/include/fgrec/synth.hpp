#pragma once
// Desk-scale synthetic corpora with power-law forwarding activity and
// labels sampled from a planted factor-graph model. The withheld truth for
// Y^U ships alongside the corpus so recovery experiments can score against
// it. Generation is single-threaded and byte-deterministic per seed.

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>

#include "fgrec/corpus.hpp"
#include "fgrec/graph.hpp"

namespace fgrec {

struct SynthConfig {
    std::uint32_t n_users = 200;
    std::uint32_t n_items = 1000;
    std::uint32_t n_topics = 8;
    std::uint32_t vocab_size = 500;
    double powerlaw_exponent = 2.0;  // forwarding-count tail, > 1
    Params planted{1.0, 0.5, 0.5, 0.8};
    double known_fraction = 0.64;  // strictly inside (0,1)
    std::uint32_t behaviors_per_user = 40;
    std::uint64_t seed = 1;
};

struct SynthResult {
    Corpus corpus;
    // Withheld labels for the unknown pairs; disjoint from Y^K and together
    // with it covering every generated behavior.
    std::unordered_map<std::uint64_t, std::int8_t> truth;
};

SynthResult generate_corpus(const SynthConfig& config);

// Corpus files in the loader's formats plus truth.jsonl.
void write_synth(const SynthResult& result, const std::filesystem::path& dir);
std::unordered_map<std::uint64_t, std::int8_t> load_truth(const Corpus& corpus,
                                                          const std::filesystem::path& path);

// Maximum-likelihood discrete power-law exponent for counts >= x_min,
// fitted on the ratios x/x_min (so rescaling the counts and x_min together
// leaves the estimate unchanged). Requires >= 50 qualifying counts with at
// least two distinct values.
double fit_power_law(std::span<const std::uint64_t> counts, double x_min = 1.0);

// Riemann zeta for s > 1 (Euler-Maclaurin); exposed for the estimator tests.
double riemann_zeta(double s);

}  // namespace fgrec

#pragma once
// Declarative run configuration: flat-sectioned INI, strict schema
// (unknown keys rejected), canonical serialization and a stable hash that
// names the run directory.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgrec/graph.hpp"
#include "fgrec/inference.hpp"
#include "fgrec/influence.hpp"
#include "fgrec/synth.hpp"

namespace fgrec {

// Parse/validation problems map to exit code 2 in the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // [run]
    std::uint64_t seed = 42;
    int threads = 0;  // 0 = all cores
    std::string out_dir = "runs";
    std::string kernels = "auto";  // auto|scalar|avx2|neon

    // [corpus] — all four set => ingest mode; all empty => synth mode
    std::string corpus_users;
    std::string corpus_items;
    std::string corpus_interactions;
    std::string corpus_labels;
    std::string corpus_truth;  // optional truth for eval in ingest mode

    // [synth] (seed comes from run.seed)
    SynthConfig synth;

    // [features] — influence scoring parameters
    InfluenceParams influence;

    // [edge]
    EdgeParams edge;

    // [train]
    std::string engine = "auto";  // auto|exact|lbp
    int train_max_iters = 200;
    double train_tol = 1e-6;
    double mu = 0.01;
    Params init{0.5, 0.5, 0.5, 0.5};
    double abstain_u = 0.0;
    LbpOptions lbp;

    // [eval]
    std::string abstain_policy = "excluded";  // excluded|negative

    bool synth_mode() const { return corpus_users.empty(); }
    EngineOptions engine_options() const;
    TrainOptions train_options() const;
};

// `overrides` entries look like "section.key=value" (the --set flag).
RunConfig parse_config(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides);
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides);

// Canonical INI with every default expanded; reparsing reproduces the
// config exactly.
std::string resolved_config_text(const RunConfig& config);

// 16 hex digits (FNV-1a over the canonical text).
std::string config_hash(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace fgrec

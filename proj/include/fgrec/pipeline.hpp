#pragma once
// Stage orchestration over a run directory. Every stage reads its inputs
// from disk and writes its artifacts back, so `pipeline` is byte-identical
// to invoking the stages one by one. The run directory is named by config
// hash and seed and always carries the fully-resolved config.

#include <filesystem>
#include <map>

#include "fgrec/config.hpp"
#include "fgrec/eval.hpp"
#include "fgrec/inference.hpp"

namespace fgrec {

// What a single ablation variant changes relative to the full model.
struct VariantSpec {
    FeatureOptions features;
    bool drop_edges = false;
};

VariantSpec variant_spec(Variant v);

struct ModelOutcome {
    FactorGraph graph;
    TrainResult training;
    Marginals marginals;
    std::map<std::uint64_t, std::int8_t> predictions;  // unknown pairs only
};

// One full modeling pass (features -> graph -> train -> predict) over an
// in-memory corpus under a variant.
ModelOutcome run_model(const Corpus& corpus, const RunConfig& config, Variant variant);

class Runner {
public:
    Runner(RunConfig config, std::filesystem::path run_dir);

    // out_dir / "<config-hash>-<seed>"
    static std::filesystem::path default_run_dir(const RunConfig& config);

    const std::filesystem::path& dir() const { return dir_; }

    void stage_synth();
    void stage_validate();
    void stage_features();
    void stage_build_graph();
    void stage_train();
    void stage_predict();
    void stage_eval();
    void stage_ablate();
    void stage_pipeline();

    // Dispatch by stage name; throws std::invalid_argument on unknown names.
    void run_stage(const std::string& name);

private:
    Corpus load_input_corpus() const;
    std::unordered_map<std::uint64_t, std::int8_t> load_input_truth(const Corpus& corpus) const;
    FactorGraph load_graph_file(std::vector<std::uint64_t>* pairs_out) const;

    RunConfig config_;
    std::filesystem::path dir_;
};

}  // namespace fgrec

#pragma once
// Prediction scoring: confusion matrix, accuracy/precision/recall/F1, and
// the feature-ablation experiment (retrain with one feature disabled,
// everything else identical).

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fgrec/corpus.hpp"

namespace fgrec {

struct RunConfig;

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    std::uint64_t abstained = 0;

    std::uint64_t decided() const { return tp + fp + tn + fn; }
};

struct MetricsValues {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// 2PR/(P+R), 0 when P+R = 0.
double f1_score(double precision, double recall);

// Throws on an empty matrix (no decided pairs). Abstained pairs are outside
// every denominator.
MetricsValues metrics(const ConfusionMatrix& cm);

enum class AbstainPolicy { excluded, negative };

struct MetricsReport {
    ConfusionMatrix cm;
    MetricsValues values;
};

// predictions: pair -> +1/-1/0 (0 = abstain); truth: pair -> +1/-1.
// Every truth pair needs a prediction entry and vice versa.
MetricsReport evaluate(const std::map<std::uint64_t, std::int8_t>& predictions,
                       const std::map<std::uint64_t, std::int8_t>& truth, AbstainPolicy policy);

enum class Variant {
    ALL = 0,
    NoEdge,
    NoFN,
    NoKW,
    NoTP,
    NoRN,
    NoCN,
    NoMN,
    NoGN,
};
constexpr std::size_t kVariantCount = 9;

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);  // throws on unknown names

struct AblationRow {
    Variant variant = Variant::ALL;
    MetricsValues values;
    ConfusionMatrix cm;
};

struct AblationReport {
    std::vector<AblationRow> rows;  // fixed variant order, ALL first
    std::string config_hash;        // shared across variants by construction
};

// Aligned plain-text table, variants across the top.
std::string format_ablation_table(const AblationReport& report);

// Runs the full pipeline once per variant (same seed, init and
// hyperparameters; only the ablated feature differs) and scores each
// against the withheld truth.
AblationReport ablate(const Corpus& corpus,
                      const std::unordered_map<std::uint64_t, std::int8_t>& truth,
                      const RunConfig& config);

}  // namespace fgrec

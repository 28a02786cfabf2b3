#include "fgrec/eval.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fgrec {

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    if (denom <= 0.0) return 0.0;
    return 2.0 * precision * recall / denom;
}

MetricsValues metrics(const ConfusionMatrix& cm) {
    if (cm.decided() == 0) {
        throw std::invalid_argument("metrics: empty confusion matrix");
    }
    MetricsValues m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.decided());
    m.precision = cm.tp + cm.fp > 0
                      ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp)
                      : 0.0;
    m.recall =
        cm.tp + cm.fn > 0 ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    return m;
}

MetricsReport evaluate(const std::map<std::uint64_t, std::int8_t>& predictions,
                       const std::map<std::uint64_t, std::int8_t>& truth, AbstainPolicy policy) {
    for (const auto& [key, yhat] : predictions) {
        if (!truth.count(key)) {
            throw std::invalid_argument("evaluate: prediction for a pair absent from truth");
        }
    }
    MetricsReport report;
    for (const auto& [key, label] : truth) {
        auto it = predictions.find(key);
        if (it == predictions.end()) {
            throw std::invalid_argument("evaluate: truth pair without a prediction");
        }
        std::int8_t yhat = it->second;
        if (yhat == 0) {
            if (policy == AbstainPolicy::excluded) {
                ++report.cm.abstained;
                continue;
            }
            yhat = -1;  // AbstainPolicy::negative
        }
        if (label > 0) {
            yhat > 0 ? ++report.cm.tp : ++report.cm.fn;
        } else {
            yhat > 0 ? ++report.cm.fp : ++report.cm.tn;
        }
    }
    report.values = metrics(report.cm);
    return report;
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::ALL: return "ALL";
        case Variant::NoEdge: return "NoEdge";
        case Variant::NoFN: return "NoFN";
        case Variant::NoKW: return "NoKW";
        case Variant::NoTP: return "NoTP";
        case Variant::NoRN: return "NoRN";
        case Variant::NoCN: return "NoCN";
        case Variant::NoMN: return "NoMN";
        case Variant::NoGN: return "NoGN";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    for (std::size_t i = 0; i < kVariantCount; ++i) {
        auto v = static_cast<Variant>(i);
        if (name == variant_name(v)) return v;
    }
    throw std::invalid_argument("unknown ablation variant '" + name + "'");
}

std::string format_ablation_table(const AblationReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "Item";
    for (const auto& row : report.rows) {
        os << std::right << std::setw(9) << variant_name(row.variant);
    }
    os << '\n';
    auto line = [&](const char* label, double MetricsValues::* field) {
        os << std::left << std::setw(10) << label;
        for (const auto& row : report.rows) {
            os << std::right << std::setw(9) << std::fixed << std::setprecision(4)
               << row.values.*field;
        }
        os << '\n';
    };
    line("Accuracy", &MetricsValues::accuracy);
    line("Precision", &MetricsValues::precision);
    line("Recall", &MetricsValues::recall);
    line("F1-Score", &MetricsValues::f1);
    return os.str();
}

}  // namespace fgrec

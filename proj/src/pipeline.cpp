#include "fgrec/pipeline.hpp"

#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "fgrec/kernels.hpp"
#include "fgrec/synth.hpp"

namespace fgrec {

using ordered_json = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

ordered_json parse_line(const std::filesystem::path& path, const std::string& line,
                        std::size_t line_no) {
    auto rec = ordered_json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": malformed JSON record");
    }
    return rec;
}

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        fn(parse_line(path, line, line_no), line_no);
    }
}

CorpusPaths synth_corpus_paths(const std::filesystem::path& dir) {
    auto base = dir / "corpus";
    return {base / "users.jsonl", base / "items.jsonl", base / "interactions.jsonl",
            base / "labels.jsonl"};
}

std::vector<BehaviorRef> behavior_refs(const std::vector<std::uint64_t>& pairs) {
    std::vector<BehaviorRef> refs(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        refs[i] = {pair_user(pairs[i]), pair_item(pairs[i])};
    }
    return refs;
}

std::vector<BehaviorNode> behavior_nodes(const Corpus& corpus, const FeatureSet& fs) {
    std::vector<BehaviorNode> nodes(fs.pairs.size());
    for (std::size_t i = 0; i < fs.pairs.size(); ++i) {
        std::int8_t label = 0;
        if (auto it = corpus.labels.known.find(fs.pairs[i]); it != corpus.labels.known.end()) {
            label = it->second;
        }
        nodes[i] = {pair_user(fs.pairs[i]), pair_item(fs.pairs[i]), fs.distances[i], label};
    }
    return nodes;
}

void write_report(const std::filesystem::path& dir, const AblationReport& report) {
    ordered_json doc = ordered_json::object();
    doc["rows"] = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json r = ordered_json::object();
        r["variant"] = variant_name(row.variant);
        r["accuracy"] = row.values.accuracy;
        r["precision"] = row.values.precision;
        r["recall"] = row.values.recall;
        r["f1"] = row.values.f1;
        r["tp"] = row.cm.tp;
        r["fp"] = row.cm.fp;
        r["tn"] = row.cm.tn;
        r["fn"] = row.cm.fn;
        r["abstained"] = row.cm.abstained;
        doc["rows"].push_back(std::move(r));
    }
    doc["config_hash"] = report.config_hash;
    auto out = open_out(dir / "report.json");
    out << doc.dump(2) << '\n';
    auto txt = open_out(dir / "report.txt");
    txt << format_ablation_table(report);
}

}  // namespace

VariantSpec variant_spec(Variant v) {
    VariantSpec spec;
    switch (v) {
        case Variant::ALL: break;
        case Variant::NoEdge: spec.drop_edges = true; break;
        case Variant::NoFN: spec.features.zero_column = AttrColumn::FN; break;
        case Variant::NoKW: spec.features.zero_d_kw = true; break;
        case Variant::NoTP: spec.features.zero_d_tp = true; break;
        case Variant::NoRN: spec.features.zero_column = AttrColumn::RN; break;
        case Variant::NoCN: spec.features.zero_column = AttrColumn::CN; break;
        case Variant::NoMN: spec.features.zero_column = AttrColumn::MN; break;
        case Variant::NoGN: spec.features.zero_column = AttrColumn::GN; break;
    }
    return spec;
}

ModelOutcome run_model(const Corpus& corpus, const RunConfig& config, Variant variant) {
    const VariantSpec spec = variant_spec(variant);

    FeatureSet fs = compute_features(corpus, spec.features);
    InfluenceTable influence(corpus, config.influence);
    EdgeParams edge_params = config.edge;
    if (spec.drop_edges) edge_params.d_max = 0;
    std::vector<Edge> edges = build_edges(corpus, behavior_refs(fs.pairs), influence, edge_params);

    ModelOutcome out;
    out.graph = FactorGraph(behavior_nodes(corpus, fs), std::move(edges), config.init);
    out.training = train(out.graph, config.train_options());
    out.marginals = posterior_marginals(out.graph, out.training.params, config.engine_options());
    for (std::size_t i = 0; i < fs.pairs.size(); ++i) {
        if (out.graph.nodes()[i].label == 0) {
            out.predictions[fs.pairs[i]] = predict_label(out.marginals.p_pos[i], config.abstain_u);
        }
    }
    return out;
}

AblationReport ablate(const Corpus& corpus,
                      const std::unordered_map<std::uint64_t, std::int8_t>& truth,
                      const RunConfig& config) {
    std::map<std::uint64_t, std::int8_t> truth_map(truth.begin(), truth.end());
    const AbstainPolicy policy =
        config.abstain_policy == "negative" ? AbstainPolicy::negative : AbstainPolicy::excluded;

    AblationReport report;
    report.config_hash = config_hash(config);
    for (std::size_t i = 0; i < kVariantCount; ++i) {
        const auto variant = static_cast<Variant>(i);
        ModelOutcome outcome = run_model(corpus, config, variant);
        std::map<std::uint64_t, std::int8_t> predictions;
        for (const auto& [key, label] : truth_map) {
            if (auto it = outcome.predictions.find(key); it != outcome.predictions.end()) {
                predictions[key] = it->second;
            }
        }
        MetricsReport mr = evaluate(predictions, truth_map, policy);
        report.rows.push_back({variant, mr.values, mr.cm});
    }
    return report;
}

Runner::Runner(RunConfig config, std::filesystem::path run_dir)
    : config_(std::move(config)), dir_(std::move(run_dir)) {
    if (config_.kernels != "auto") {
        kernels::Backend b = config_.kernels == "scalar" ? kernels::Backend::scalar
                             : config_.kernels == "avx2" ? kernels::Backend::avx2
                                                         : kernels::Backend::neon;
        kernels::force_backend(b);
    }
    std::filesystem::create_directories(dir_);
    auto out = open_out(dir_ / "resolved.ini");
    out << resolved_config_text(config_);
}

std::filesystem::path Runner::default_run_dir(const RunConfig& config) {
    return std::filesystem::path(config.out_dir) /
           (config_hash(config) + "-" + std::to_string(config.seed));
}

Corpus Runner::load_input_corpus() const {
    if (config_.synth_mode()) {
        return load_corpus(synth_corpus_paths(dir_));
    }
    return load_corpus({config_.corpus_users, config_.corpus_items, config_.corpus_interactions,
                        config_.corpus_labels});
}

std::unordered_map<std::uint64_t, std::int8_t> Runner::load_input_truth(
    const Corpus& corpus) const {
    if (config_.synth_mode()) {
        return load_truth(corpus, dir_ / "corpus" / "truth.jsonl");
    }
    if (config_.corpus_truth.empty()) {
        throw std::runtime_error("no truth available: set corpus.truth for ingested corpora");
    }
    return load_truth(corpus, config_.corpus_truth);
}

void Runner::stage_synth() {
    if (!config_.synth_mode()) {
        throw std::runtime_error("synth stage: config selects an ingested corpus");
    }
    SynthResult result = generate_corpus(config_.synth);
    write_synth(result, dir_ / "corpus");
}

void Runner::stage_validate() {
    Corpus corpus = load_input_corpus();
    ValidationReport report = validate_corpus(corpus);
    ordered_json doc = ordered_json::object();
    doc["violations"] = report.violations;
    doc["warnings"] = report.warnings;
    auto out = open_out(dir_ / "validation.json");
    out << doc.dump(2) << '\n';
    for (const auto& v : report.violations) std::cout << "violation: " << v << '\n';
    for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
    std::cout << "validate: " << report.violations.size() << " violation(s), "
              << report.warnings.size() << " warning(s)\n";
}

void Runner::stage_features() {
    Corpus corpus = load_input_corpus();
    FeatureSet fs = compute_features(corpus);
    auto out = open_out(dir_ / "features.jsonl");
    for (std::size_t i = 0; i < fs.pairs.size(); ++i) {
        ordered_json rec = ordered_json::object();
        rec["user"] = corpus.users[pair_user(fs.pairs[i])].id;
        rec["item"] = corpus.items[pair_item(fs.pairs[i])].id;
        rec["d_u"] = fs.distances[i].d_u;
        rec["d_tp"] = fs.distances[i].d_tp;
        rec["d_kw"] = fs.distances[i].d_kw;
        out << rec.dump() << '\n';
    }
}

void Runner::stage_build_graph() {
    Corpus corpus = load_input_corpus();
    FeatureSet fs = compute_features(corpus);
    InfluenceTable influence(corpus, config_.influence);
    std::vector<Edge> edges = build_edges(corpus, behavior_refs(fs.pairs), influence, config_.edge);

    {
        auto out = open_out(dir_ / "edges.jsonl");
        for (const auto& e : edges) {
            ordered_json rec = ordered_json::object();
            rec["a"] = std::to_string(e.node_a);
            rec["b"] = std::to_string(e.node_b);
            rec["topic"] = e.topic;
            rec["basis"] = e.weight_basis;
            out << rec.dump() << '\n';
        }
    }
    {
        auto out = open_out(dir_ / "graph.jsonl");
        std::vector<BehaviorNode> nodes = behavior_nodes(corpus, fs);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            ordered_json rec = ordered_json::object();
            rec["id"] = i;
            rec["user"] = corpus.users[nodes[i].user].id;
            rec["item"] = corpus.items[nodes[i].item].id;
            rec["d_u"] = nodes[i].distances.d_u;
            rec["d_tp"] = nodes[i].distances.d_tp;
            rec["d_kw"] = nodes[i].distances.d_kw;
            if (nodes[i].label == 0) {
                rec["y"] = nullptr;
            } else {
                rec["y"] = static_cast<int>(nodes[i].label);
            }
            out << rec.dump() << '\n';
        }
        for (const auto& e : edges) {
            ordered_json rec = ordered_json::object();
            rec["edge"] = ordered_json::array({e.node_a, e.node_b});
            rec["topic"] = e.topic;
            rec["basis"] = e.weight_basis;
            out << rec.dump() << '\n';
        }
    }
}

FactorGraph Runner::load_graph_file(std::vector<std::uint64_t>* pairs_out) const {
    Corpus corpus = load_input_corpus();
    std::vector<BehaviorNode> nodes;
    std::vector<Edge> edges;
    if (pairs_out) pairs_out->clear();
    for_each_line(dir_ / "graph.jsonl", [&](const ordered_json& rec, std::size_t line_no) {
        if (rec.contains("edge")) {
            Edge e;
            e.node_a = rec.at("edge").at(0).get<std::uint32_t>();
            e.node_b = rec.at("edge").at(1).get<std::uint32_t>();
            e.topic = rec.at("topic").get<std::uint32_t>();
            e.weight_basis = rec.at("basis").get<double>();
            edges.push_back(e);
            return;
        }
        BehaviorNode node;
        const auto& uid = rec.at("user").get_ref<const std::string&>();
        const auto& iid = rec.at("item").get_ref<const std::string&>();
        auto u = corpus.user_index.find(uid);
        auto it = corpus.item_index.find(iid);
        if (u == corpus.user_index.end() || it == corpus.item_index.end()) {
            throw std::runtime_error("graph.jsonl:" + std::to_string(line_no) +
                                     ": id not present in the corpus");
        }
        node.user = u->second;
        node.item = it->second;
        node.distances.d_u = rec.at("d_u").get<double>();
        node.distances.d_tp = rec.at("d_tp").get<double>();
        node.distances.d_kw = rec.at("d_kw").get<double>();
        node.label = rec.at("y").is_null() ? 0 : static_cast<std::int8_t>(rec.at("y").get<int>());
        if (pairs_out) pairs_out->push_back(pair_key(node.user, node.item));
        nodes.push_back(node);
    });
    return FactorGraph(std::move(nodes), std::move(edges), config_.init);
}

void Runner::stage_train() {
    FactorGraph graph = load_graph_file(nullptr);
    TrainResult result = train(graph, config_.train_options());

    const double unknown_ratio =
        graph.clamped_count() > 0
            ? static_cast<double>(graph.unknown_count()) / static_cast<double>(graph.clamped_count())
            : 0.0;
    {
        auto out = open_out(dir_ / "trace.jsonl");
        for (const auto& entry : result.trace) {
            ordered_json rec = ordered_json::object();
            rec["iter"] = entry.iter;
            rec["objective"] = entry.objective;
            rec["grad_norm"] = entry.grad_norm;
            rec["step"] = entry.step;
            rec["phi"] = entry.phi.as_array();
            rec["unknown_ratio"] = unknown_ratio;
            out << rec.dump() << '\n';
        }
    }
    {
        ordered_json doc = ordered_json::object();
        doc["alpha"] = result.params.alpha;
        doc["beta"] = result.params.beta;
        doc["gamma"] = result.params.gamma;
        doc["lambda"] = result.params.lambda;
        doc["iterations"] = result.trace.empty() ? 0 : result.trace.back().iter;
        doc["converged"] = result.converged;
        auto out = open_out(dir_ / "params.json");
        out << doc.dump(2) << '\n';
    }
}

void Runner::stage_predict() {
    std::vector<std::uint64_t> pairs;
    FactorGraph graph = load_graph_file(&pairs);
    Corpus corpus = load_input_corpus();

    Params params;
    {
        std::ifstream in(dir_ / "params.json");
        if (!in) throw std::runtime_error("cannot open " + (dir_ / "params.json").string() +
                                          " (run the train stage first)");
        auto doc = ordered_json::parse(in, nullptr, false);
        if (doc.is_discarded()) throw std::runtime_error("params.json is malformed");
        params.alpha = doc.at("alpha").get<double>();
        params.beta = doc.at("beta").get<double>();
        params.gamma = doc.at("gamma").get<double>();
        params.lambda = doc.at("lambda").get<double>();
    }

    Marginals marginals = posterior_marginals(graph, params, config_.engine_options());
    auto out = open_out(dir_ / "predictions.jsonl");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        ordered_json rec = ordered_json::object();
        rec["user"] = corpus.users[pair_user(pairs[i])].id;
        rec["item"] = corpus.items[pair_item(pairs[i])].id;
        rec["p_pos"] = marginals.p_pos[i];
        std::int8_t yhat = predict_label(marginals.p_pos[i], config_.abstain_u);
        if (yhat == 0) {
            rec["yhat"] = nullptr;
        } else {
            rec["yhat"] = static_cast<int>(yhat);
        }
        out << rec.dump() << '\n';
    }
}

void Runner::stage_eval() {
    Corpus corpus = load_input_corpus();
    auto truth_raw = load_input_truth(corpus);
    std::map<std::uint64_t, std::int8_t> truth(truth_raw.begin(), truth_raw.end());

    std::map<std::uint64_t, std::int8_t> predictions;
    for_each_line(dir_ / "predictions.jsonl", [&](const ordered_json& rec, std::size_t line_no) {
        auto u = corpus.user_index.find(rec.at("user").get<std::string>());
        auto it = corpus.item_index.find(rec.at("item").get<std::string>());
        if (u == corpus.user_index.end() || it == corpus.item_index.end()) {
            throw std::runtime_error("predictions.jsonl:" + std::to_string(line_no) +
                                     ": id not present in the corpus");
        }
        std::uint64_t key = pair_key(u->second, it->second);
        if (!truth.count(key)) return;  // clamped node; nothing to score
        predictions[key] =
            rec.at("yhat").is_null() ? 0 : static_cast<std::int8_t>(rec.at("yhat").get<int>());
    });

    const AbstainPolicy policy =
        config_.abstain_policy == "negative" ? AbstainPolicy::negative : AbstainPolicy::excluded;
    MetricsReport mr = evaluate(predictions, truth, policy);

    AblationReport report;
    report.config_hash = config_hash(config_);
    report.rows.push_back({Variant::ALL, mr.values, mr.cm});
    write_report(dir_, report);
}

void Runner::stage_ablate() {
    Corpus corpus = load_input_corpus();
    auto truth = load_input_truth(corpus);
    AblationReport report = ablate(corpus, truth, config_);
    write_report(dir_, report);
    std::cout << format_ablation_table(report);
}

void Runner::stage_pipeline() {
    if (config_.synth_mode()) stage_synth();
    stage_features();
    stage_build_graph();
    stage_train();
    stage_predict();
    stage_eval();
}

void Runner::run_stage(const std::string& name) {
    if (name == "synth") stage_synth();
    else if (name == "validate") stage_validate();
    else if (name == "features") stage_features();
    else if (name == "build-graph") stage_build_graph();
    else if (name == "train") stage_train();
    else if (name == "predict") stage_predict();
    else if (name == "eval") stage_eval();
    else if (name == "ablate") stage_ablate();
    else if (name == "pipeline") stage_pipeline();
    else throw std::invalid_argument("unknown stage '" + name + "'");
}

}  // namespace fgrec

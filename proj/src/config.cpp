#include "fgrec/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace fgrec {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// section.key -> raw value, insertion order preserved for error reporting.
using RawEntries = std::vector<std::pair<std::string, std::string>>;

RawEntries parse_ini(const std::string& text) {
    RawEntries entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            }
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        if (section.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside any [section]");
        }
        entries.emplace_back(section + "." + key, value);
    }
    return entries;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" +
                          value + "'");
    }
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
    return out;
}

void apply_entry(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "run.seed") c.seed = parse_u64(key, value);
    else if (key == "run.threads") c.threads = parse_int(key, value);
    else if (key == "run.out_dir") c.out_dir = value;
    else if (key == "run.kernels") c.kernels = value;
    else if (key == "corpus.users") c.corpus_users = value;
    else if (key == "corpus.items") c.corpus_items = value;
    else if (key == "corpus.interactions") c.corpus_interactions = value;
    else if (key == "corpus.labels") c.corpus_labels = value;
    else if (key == "corpus.truth") c.corpus_truth = value;
    else if (key == "synth.users") c.synth.n_users = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth.items") c.synth.n_items = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth.topics") c.synth.n_topics = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth.vocab") c.synth.vocab_size = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth.exponent") c.synth.powerlaw_exponent = parse_double(key, value);
    else if (key == "synth.behaviors_per_user")
        c.synth.behaviors_per_user = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "synth.known_fraction") c.synth.known_fraction = parse_double(key, value);
    else if (key == "synth.alpha") c.synth.planted.alpha = parse_double(key, value);
    else if (key == "synth.beta") c.synth.planted.beta = parse_double(key, value);
    else if (key == "synth.gamma") c.synth.planted.gamma = parse_double(key, value);
    else if (key == "synth.lambda") c.synth.planted.lambda = parse_double(key, value);
    else if (key == "features.sigma") c.influence.sigma = parse_double(key, value);
    else if (key == "features.w_forward") c.influence.w_forward = parse_double(key, value);
    else if (key == "features.w_reply") c.influence.w_reply = parse_double(key, value);
    else if (key == "features.w_comment") c.influence.w_comment = parse_double(key, value);
    else if (key == "features.w_mention") c.influence.w_mention = parse_double(key, value);
    else if (key == "edge.tau") c.edge.tau = parse_double(key, value);
    else if (key == "edge.delta") c.edge.delta = parse_double(key, value);
    else if (key == "edge.d_max") c.edge.d_max = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "train.engine") c.engine = value;
    else if (key == "train.max_iters") c.train_max_iters = parse_int(key, value);
    else if (key == "train.tol") c.train_tol = parse_double(key, value);
    else if (key == "train.mu") c.mu = parse_double(key, value);
    else if (key == "train.init_alpha") c.init.alpha = parse_double(key, value);
    else if (key == "train.init_beta") c.init.beta = parse_double(key, value);
    else if (key == "train.init_gamma") c.init.gamma = parse_double(key, value);
    else if (key == "train.init_lambda") c.init.lambda = parse_double(key, value);
    else if (key == "train.abstain_u") c.abstain_u = parse_double(key, value);
    else if (key == "train.lbp_max_iters") c.lbp.max_iters = parse_int(key, value);
    else if (key == "train.lbp_damping") c.lbp.damping = parse_double(key, value);
    else if (key == "train.lbp_tol") c.lbp.tol = parse_double(key, value);
    else if (key == "eval.abstain_policy") c.abstain_policy = value;
    else throw ConfigError("unknown config key '" + key + "'");
}

void validate(const RunConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (c.threads < 0) fail("run.threads must be >= 0");
    if (c.kernels != "auto" && c.kernels != "scalar" && c.kernels != "avx2" && c.kernels != "neon") {
        fail("run.kernels must be auto, scalar, avx2 or neon");
    }
    bool any_path = !c.corpus_users.empty() || !c.corpus_items.empty() ||
                    !c.corpus_interactions.empty() || !c.corpus_labels.empty();
    bool all_paths = !c.corpus_users.empty() && !c.corpus_items.empty() &&
                     !c.corpus_interactions.empty() && !c.corpus_labels.empty();
    if (any_path && !all_paths) {
        fail("corpus.users/items/interactions/labels must be set together");
    }
    if (!(c.influence.sigma > 0.0)) fail("features.sigma must be positive");
    if (c.edge.tau < -1.0 || c.edge.tau > 1.0) fail("edge.tau must lie in [-1, 1]");
    if (c.edge.delta < 0.0) fail("edge.delta must be >= 0");
    if (c.engine != "auto" && c.engine != "exact" && c.engine != "lbp") {
        fail("train.engine must be auto, exact or lbp");
    }
    if (c.train_max_iters < 1) fail("train.max_iters must be >= 1");
    if (!(c.train_tol > 0.0)) fail("train.tol must be positive");
    if (c.mu < 0.0) fail("train.mu must be >= 0");
    if (c.abstain_u < 0.0 || c.abstain_u >= 0.5) fail("train.abstain_u must lie in [0, 0.5)");
    if (c.lbp.max_iters < 1) fail("train.lbp_max_iters must be >= 1");
    if (c.lbp.damping < 0.0 || c.lbp.damping >= 1.0) fail("train.lbp_damping must lie in [0, 1)");
    if (!(c.lbp.tol > 0.0)) fail("train.lbp_tol must be positive");
    if (c.abstain_policy != "excluded" && c.abstain_policy != "negative") {
        fail("eval.abstain_policy must be excluded or negative");
    }
    if (!(c.synth.powerlaw_exponent > 1.0)) fail("synth.exponent must exceed 1");
    if (!(c.synth.known_fraction > 0.0 && c.synth.known_fraction < 1.0)) {
        fail("synth.known_fraction must lie strictly inside (0, 1)");
    }
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

EngineOptions RunConfig::engine_options() const {
    EngineOptions opts;
    opts.kind = engine == "exact" ? EngineKind::exact
                : engine == "lbp" ? EngineKind::lbp
                                  : EngineKind::automatic;
    opts.lbp = lbp;
    opts.threads = threads;
    return opts;
}

TrainOptions RunConfig::train_options() const {
    TrainOptions opts;
    opts.engine = engine_options();
    opts.max_iters = train_max_iters;
    opts.tol = train_tol;
    opts.mu = mu;
    opts.init = init;
    return opts;
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    RunConfig config;
    for (const auto& [key, value] : parse_ini(text)) {
        apply_entry(config, key, value);
    }
    for (const auto& ov : overrides) {
        std::size_t eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects section.key=value, got '" + ov + "'");
        }
        std::string key = trim(ov.substr(0, eq));
        std::string value = trim(ov.substr(eq + 1));
        if (key.find('.') == std::string::npos) {
            throw ConfigError("--set expects section.key=value, got '" + ov + "'");
        }
        apply_entry(config, key, value);
    }
    validate(config);
    config.synth.seed = config.seed;
    return config;
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), overrides);
}

std::string resolved_config_text(const RunConfig& c) {
    std::ostringstream os;
    os << "[run]\n";
    os << "seed = " << c.seed << "\n";
    os << "threads = " << c.threads << "\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "kernels = " << c.kernels << "\n";
    os << "\n[corpus]\n";
    os << "users = " << c.corpus_users << "\n";
    os << "items = " << c.corpus_items << "\n";
    os << "interactions = " << c.corpus_interactions << "\n";
    os << "labels = " << c.corpus_labels << "\n";
    os << "truth = " << c.corpus_truth << "\n";
    os << "\n[synth]\n";
    os << "users = " << c.synth.n_users << "\n";
    os << "items = " << c.synth.n_items << "\n";
    os << "topics = " << c.synth.n_topics << "\n";
    os << "vocab = " << c.synth.vocab_size << "\n";
    os << "exponent = " << format_double(c.synth.powerlaw_exponent) << "\n";
    os << "behaviors_per_user = " << c.synth.behaviors_per_user << "\n";
    os << "known_fraction = " << format_double(c.synth.known_fraction) << "\n";
    os << "alpha = " << format_double(c.synth.planted.alpha) << "\n";
    os << "beta = " << format_double(c.synth.planted.beta) << "\n";
    os << "gamma = " << format_double(c.synth.planted.gamma) << "\n";
    os << "lambda = " << format_double(c.synth.planted.lambda) << "\n";
    os << "\n[features]\n";
    os << "sigma = " << format_double(c.influence.sigma) << "\n";
    os << "w_forward = " << format_double(c.influence.w_forward) << "\n";
    os << "w_reply = " << format_double(c.influence.w_reply) << "\n";
    os << "w_comment = " << format_double(c.influence.w_comment) << "\n";
    os << "w_mention = " << format_double(c.influence.w_mention) << "\n";
    os << "\n[edge]\n";
    os << "tau = " << format_double(c.edge.tau) << "\n";
    os << "delta = " << format_double(c.edge.delta) << "\n";
    os << "d_max = " << c.edge.d_max << "\n";
    os << "\n[train]\n";
    os << "engine = " << c.engine << "\n";
    os << "max_iters = " << c.train_max_iters << "\n";
    os << "tol = " << format_double(c.train_tol) << "\n";
    os << "mu = " << format_double(c.mu) << "\n";
    os << "init_alpha = " << format_double(c.init.alpha) << "\n";
    os << "init_beta = " << format_double(c.init.beta) << "\n";
    os << "init_gamma = " << format_double(c.init.gamma) << "\n";
    os << "init_lambda = " << format_double(c.init.lambda) << "\n";
    os << "abstain_u = " << format_double(c.abstain_u) << "\n";
    os << "lbp_max_iters = " << c.lbp.max_iters << "\n";
    os << "lbp_damping = " << format_double(c.lbp.damping) << "\n";
    os << "lbp_tol = " << format_double(c.lbp.tol) << "\n";
    os << "\n[eval]\n";
    os << "abstain_policy = " << c.abstain_policy << "\n";
    return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& config) {
    // Execution-environment keys (worker count, output root, kernel
    // backend) do not change the experiment; normalize them out so reruns
    // land in the same directory with identical artifacts.
    RunConfig normalized = config;
    normalized.threads = 0;
    normalized.out_dir.clear();
    normalized.kernels = "auto";
    std::uint64_t h = fnv1a64(resolved_config_text(normalized));
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace fgrec

#include <docflow/config.hpp>

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace docflow {

namespace fs = std::filesystem;

std::string_view to_string(TrainingObjective objective) { return objective == TrainingObjective::mlm ? "mlm" : "clm"; }
std::string_view to_string(TrainingSlotMode mode) { return mode == TrainingSlotMode::fixed ? "fixed" : "overlap"; }
std::string_view to_string(ProviderKind kind) { return kind == ProviderKind::stub ? "stub" : "files"; }

namespace {

void check_keys(const YAML::Node& node, const std::string& prefix, const std::set<std::string>& allowed) {
    if (!node.IsMap()) throw ConfigError("'" + prefix + "' must be a mapping");
    for (const auto& entry : node) {
        const auto key = entry.first.as<std::string>();
        if (!allowed.contains(key)) {
            throw ConfigError("unknown configuration key '" + (prefix.empty() ? key : prefix + "." + key) + "'");
        }
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, const std::string& prefix, T& out) {
    if (!node[key]) return;
    try {
        out = node[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("configuration field '" + prefix + "." + key + "' has the wrong type");
    }
}

fs::path resolve(const fs::path& base, const std::string& value) {
    if (value.empty()) return {};
    const fs::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

template <typename F>
void wrap(const char* field, F&& f) {
    try {
        f();
    } catch (const ContractViolation& e) {
        throw ConfigError(std::string(field) + ": " + e.what());
    }
}

}  // namespace

void PipelineConfig::validate() const {
    if (corpus_path.empty()) throw ConfigError("corpus.path is required");
    std::error_code ec;
    if (!fs::exists(corpus_path, ec)) throw ConfigError("corpus.path does not exist: " + corpus_path.string());
    wrap("cleaning", [&] { cleaning.validate(); });
    wrap("training (SlotSpec N/K)", [&] { training.slot.validate(); });
    if (training.batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
    wrap("inference (SlotSpec S/K)", [&] { inference.validate(); });
    wrap("mask", [&] { mask.validate(); });
    wrap("kmeans", [&] {
        auto copy = kmeans;
        if (copy.k == 0) copy.k = 1;
        copy.validate();
    });
    if (kmeans.k == 0) {
        if (k_set.size() < 3) throw ConfigError("k_set needs at least 3 candidates for elbow selection");
        for (std::size_t i = 0; i < k_set.size(); ++i) {
            if (k_set[i] < 1) throw ConfigError("k_set values must be >= 1");
            if (i > 0 && k_set[i] <= k_set[i - 1]) throw ConfigError("k_set must be strictly increasing");
        }
    }
    if (projection.iterations < 50) throw ConfigError("projection.iterations must be >= 50");
    if (!(projection.perplexity >= 1.0)) throw ConfigError("projection.perplexity must be >= 1");
    if (!(projection.learning_rate > 0.0)) throw ConfigError("projection.learning_rate must be > 0");
    if (provider.dimension < 1) throw ConfigError("provider.dimension must be >= 1");
    if (!(provider.context_noise >= 0.0)) throw ConfigError("provider.context_noise must be >= 0");
    if (provider.kind == ProviderKind::files) {
        if (provider.tokens_path.empty() || provider.embeddings_path.empty())
            throw ConfigError("provider.tokens_path and provider.embeddings_path are required for kind 'files'");
        if (!fs::exists(provider.tokens_path, ec))
            throw ConfigError("provider.tokens_path does not exist: " + provider.tokens_path.string());
    }
    if (!(bench.latency_ms >= 0.0)) throw ConfigError("bench.latency_ms must be >= 0");
}

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("invalid YAML: ") + e.what());
    }
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    check_keys(root, "",
               {"corpus", "workspace", "cleaning", "training", "inference", "mask", "kmeans", "k_set", "projection",
                "provider", "bench"});

    PipelineConfig c;
    try {
        if (const auto n = root["corpus"]) {
            check_keys(n, "corpus", {"path", "format"});
            std::string path, format = "jsonl";
            read(n, "path", "corpus", path);
            read(n, "format", "corpus", format);
            c.corpus_path = resolve(base_dir, path);
            c.corpus_format = parse_corpus_format(format);
        }
        c.workspace = resolve(base_dir, root["workspace"] ? root["workspace"].as<std::string>() : c.workspace.string());

        if (const auto n = root["cleaning"]) {
            check_keys(n, "cleaning", {"steps", "min_length"});
            if (n["steps"]) {
                c.cleaning.steps.clear();
                for (const auto& s : n["steps"]) c.cleaning.steps.push_back(parse_cleaning_step(s.as<std::string>()));
            }
            read(n, "min_length", "cleaning", c.cleaning.min_length);
        }
        if (const auto n = root["training"]) {
            check_keys(n, "training", {"slot_length", "return_tokens", "mode", "batch_size", "separator_token", "objective"});
            read(n, "slot_length", "training", c.training.slot.length);
            read(n, "return_tokens", "training", c.training.slot.return_tokens);
            read(n, "batch_size", "training", c.training.batch_size);
            read(n, "separator_token", "training", c.training.separator_token);
            std::string mode(to_string(c.training.mode)), objective(to_string(c.training.objective));
            read(n, "mode", "training", mode);
            read(n, "objective", "training", objective);
            if (mode != "fixed" && mode != "overlap") throw ConfigError("training.mode must be 'fixed' or 'overlap'");
            if (objective != "mlm" && objective != "clm") throw ConfigError("training.objective must be 'mlm' or 'clm'");
            c.training.mode = mode == "fixed" ? TrainingSlotMode::fixed : TrainingSlotMode::overlap;
            c.training.objective = objective == "mlm" ? TrainingObjective::mlm : TrainingObjective::clm;
        }
        if (const auto n = root["inference"]) {
            check_keys(n, "inference", {"slot_length", "return_tokens"});
            read(n, "slot_length", "inference", c.inference.length);
            read(n, "return_tokens", "inference", c.inference.return_tokens);
        }
        if (const auto n = root["mask"]) {
            check_keys(n, "mask", {"rate", "mask_fraction", "random_fraction", "keep_fraction", "seed", "mask_token", "vocab_size"});
            read(n, "rate", "mask", c.mask.rate);
            read(n, "mask_fraction", "mask", c.mask.mask_fraction);
            read(n, "random_fraction", "mask", c.mask.random_fraction);
            read(n, "keep_fraction", "mask", c.mask.keep_fraction);
            read(n, "seed", "mask", c.mask.seed);
            read(n, "mask_token", "mask", c.mask.mask_token);
            read(n, "vocab_size", "mask", c.mask.vocab_size);
        }
        if (const auto n = root["kmeans"]) {
            check_keys(n, "kmeans", {"k", "seed", "max_iterations", "tolerance", "normalize_inputs", "restarts"});
            read(n, "k", "kmeans", c.kmeans.k);
            read(n, "seed", "kmeans", c.kmeans.seed);
            read(n, "max_iterations", "kmeans", c.kmeans.max_iterations);
            read(n, "tolerance", "kmeans", c.kmeans.tolerance);
            read(n, "normalize_inputs", "kmeans", c.kmeans.normalize_inputs);
            read(n, "restarts", "kmeans", c.kmeans.restarts);
        }
        if (const auto n = root["k_set"]) {
            if (!n.IsSequence()) throw ConfigError("k_set must be a list of integers");
            c.k_set.clear();
            for (const auto& k : n) c.k_set.push_back(k.as<std::size_t>());
        }
        if (const auto n = root["projection"]) {
            check_keys(n, "projection", {"perplexity", "iterations", "learning_rate", "seed"});
            read(n, "perplexity", "projection", c.projection.perplexity);
            read(n, "iterations", "projection", c.projection.iterations);
            read(n, "learning_rate", "projection", c.projection.learning_rate);
            read(n, "seed", "projection", c.projection.seed);
        }
        if (const auto n = root["provider"]) {
            check_keys(n, "provider", {"kind", "name", "dimension", "context_noise", "seed", "tokens_path", "embeddings_path"});
            std::string kind(to_string(c.provider.kind)), tokens, embeddings;
            read(n, "kind", "provider", kind);
            if (kind != "stub" && kind != "files") throw ConfigError("provider.kind must be 'stub' or 'files'");
            c.provider.kind = kind == "stub" ? ProviderKind::stub : ProviderKind::files;
            read(n, "name", "provider", c.provider.name);
            read(n, "dimension", "provider", c.provider.dimension);
            read(n, "context_noise", "provider", c.provider.context_noise);
            read(n, "seed", "provider", c.provider.seed);
            read(n, "tokens_path", "provider", tokens);
            read(n, "embeddings_path", "provider", embeddings);
            c.provider.tokens_path = resolve(base_dir, tokens);
            c.provider.embeddings_path = resolve(base_dir, embeddings);
        }
        if (const auto n = root["bench"]) {
            check_keys(n, "bench", {"max_docs", "latency_ms"});
            read(n, "max_docs", "bench", c.bench.max_docs);
            read(n, "latency_ms", "bench", c.bench.latency_ms);
        }
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("invalid configuration value: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::string config_to_yaml(const PipelineConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(15);
    out << YAML::BeginMap;
    out << YAML::Key << "corpus" << YAML::Value << YAML::BeginMap << YAML::Key << "path" << YAML::Value
        << c.corpus_path.string() << YAML::Key << "format" << YAML::Value << std::string(to_string(c.corpus_format))
        << YAML::EndMap;
    out << YAML::Key << "workspace" << YAML::Value << c.workspace.string();

    out << YAML::Key << "cleaning" << YAML::Value << YAML::BeginMap << YAML::Key << "steps" << YAML::Value << YAML::Flow
        << YAML::BeginSeq;
    for (const auto s : c.cleaning.steps) out << std::string(to_string(s));
    out << YAML::EndSeq << YAML::Key << "min_length" << YAML::Value << c.cleaning.min_length << YAML::EndMap;

    out << YAML::Key << "training" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "slot_length" << YAML::Value << c.training.slot.length;
    out << YAML::Key << "return_tokens" << YAML::Value << c.training.slot.return_tokens;
    out << YAML::Key << "mode" << YAML::Value << std::string(to_string(c.training.mode));
    out << YAML::Key << "batch_size" << YAML::Value << c.training.batch_size;
    out << YAML::Key << "separator_token" << YAML::Value << c.training.separator_token;
    out << YAML::Key << "objective" << YAML::Value << std::string(to_string(c.training.objective));
    out << YAML::EndMap;

    out << YAML::Key << "inference" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "slot_length" << YAML::Value << c.inference.length;
    out << YAML::Key << "return_tokens" << YAML::Value << c.inference.return_tokens;
    out << YAML::EndMap;

    out << YAML::Key << "mask" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rate" << YAML::Value << c.mask.rate;
    out << YAML::Key << "mask_fraction" << YAML::Value << c.mask.mask_fraction;
    out << YAML::Key << "random_fraction" << YAML::Value << c.mask.random_fraction;
    out << YAML::Key << "keep_fraction" << YAML::Value << c.mask.keep_fraction;
    out << YAML::Key << "seed" << YAML::Value << c.mask.seed;
    out << YAML::Key << "mask_token" << YAML::Value << c.mask.mask_token;
    out << YAML::Key << "vocab_size" << YAML::Value << c.mask.vocab_size;
    out << YAML::EndMap;

    out << YAML::Key << "kmeans" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "k" << YAML::Value << c.kmeans.k;
    out << YAML::Key << "seed" << YAML::Value << c.kmeans.seed;
    out << YAML::Key << "max_iterations" << YAML::Value << c.kmeans.max_iterations;
    out << YAML::Key << "tolerance" << YAML::Value << c.kmeans.tolerance;
    out << YAML::Key << "normalize_inputs" << YAML::Value << c.kmeans.normalize_inputs;
    out << YAML::Key << "restarts" << YAML::Value << c.kmeans.restarts;
    out << YAML::EndMap;

    out << YAML::Key << "k_set" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto k : c.k_set) out << k;
    out << YAML::EndSeq;

    out << YAML::Key << "projection" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "perplexity" << YAML::Value << c.projection.perplexity;
    out << YAML::Key << "iterations" << YAML::Value << c.projection.iterations;
    out << YAML::Key << "learning_rate" << YAML::Value << c.projection.learning_rate;
    out << YAML::Key << "seed" << YAML::Value << c.projection.seed;
    out << YAML::EndMap;

    out << YAML::Key << "provider" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(c.provider.kind));
    out << YAML::Key << "name" << YAML::Value << c.provider.name;
    out << YAML::Key << "dimension" << YAML::Value << c.provider.dimension;
    out << YAML::Key << "context_noise" << YAML::Value << c.provider.context_noise;
    out << YAML::Key << "seed" << YAML::Value << c.provider.seed;
    out << YAML::Key << "tokens_path" << YAML::Value << c.provider.tokens_path.string();
    out << YAML::Key << "embeddings_path" << YAML::Value << c.provider.embeddings_path.string();
    out << YAML::EndMap;

    out << YAML::Key << "bench" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "max_docs" << YAML::Value << c.bench.max_docs;
    out << YAML::Key << "latency_ms" << YAML::Value << c.bench.latency_ms;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace docflow

#include <docflow/cli.hpp>

#include <docflow/interchange.hpp>
#include <docflow/pipeline.hpp>
#include <docflow/synthetic.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace docflow {

namespace {

struct CommonOptions {
    std::string config;
    std::string workspace;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "Pipeline configuration (YAML)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--workspace", opts.workspace, "Workspace directory (overrides DOCFLOW_WORKSPACE and the config)");
    cmd->add_option("--seed", opts.seed, "Seed for masking, k-means and projection");
}

PipelineConfig resolve_config(const CommonOptions& opts) {
    auto config = load_config(opts.config);
    if (!opts.workspace.empty()) {
        config.workspace = opts.workspace;
    } else if (const char* env = std::getenv("DOCFLOW_WORKSPACE"); env && *env) {
        config.workspace = env;
    }
    if (opts.seed) {
        config.mask.seed = *opts.seed;
        config.kmeans.seed = *opts.seed;
        config.projection.seed = *opts.seed;
    }
    return config;
}

void report(const StageOutcome& outcome, std::ostream& out) {
    out << "[" << to_string(outcome.stage) << "] " << (outcome.skipped ? "skipped" : "done");
    if (!outcome.skipped) out << " in " << outcome.duration_seconds << " s";
    out << "\n";
    for (const auto& note : outcome.notes) out << "  " << note << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"docflow: windowed token embeddings, TF-IDF pooling, k-means and cosine cluster quality"};
    app.require_subcommand(1);

    CommonOptions common;
    auto* validate = app.add_subcommand("validate", "Parse and validate a configuration, echoing every default");
    add_common(validate, common);

    std::vector<std::pair<Stage, CLI::App*>> stage_commands;
    const std::pair<Stage, const char*> descriptions[] = {
        {Stage::ingest, "Read the corpus and apply the cleaning policy"},
        {Stage::prepare_training, "Tokenize, cut training windows with MLM masking, write the inference window manifest"},
        {Stage::embed_merge_pool, "Embed inference windows, reconcile overlaps and pool with TF-IDF weights"},
        {Stage::cluster, "Choose k by the elbow method and fit k-means"},
        {Stage::evaluate, "Pairwise and centroid cosine statistics per group"},
        {Stage::project, "Exact t-SNE projection to 2-D"},
        {Stage::bench, "Measure provider throughput in documents per minute"},
    };
    for (const auto& [stage, text] : descriptions) {
        auto* cmd = app.add_subcommand(std::string(to_string(stage)), text);
        add_common(cmd, common);
        stage_commands.emplace_back(stage, cmd);
    }
    auto* all = app.add_subcommand("all", "Run the six processing stages in order");
    add_common(all, common);

    std::string synth_out;
    SyntheticOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "Write a planted-topic synthetic corpus as JSONL");
    synth->add_option("--out", synth_out, "Output JSONL file")->required();
    synth->add_option("--docs", synth_opts.documents, "Number of documents");
    synth->add_option("--topics", synth_opts.topics, "Number of planted topics");
    synth->add_option("--min-words", synth_opts.min_words, "Minimum words per document");
    synth->add_option("--max-words", synth_opts.max_words, "Maximum words per document");
    synth->add_option("--seed", synth_opts.seed, "Generator seed");

    std::string dfe_path;
    auto* check = app.add_subcommand("check-interchange", "Validate a DFE1 token-embedding file");
    check->add_option("file", dfe_path, "Interchange file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*validate) {
            out << config_to_yaml(resolve_config(common));
            return kExitOk;
        }
        if (*synth) {
            const auto corpus = make_synthetic_corpus(synth_opts);
            std::vector<CleanDocument> raw;
            for (const auto& d : corpus.documents) raw.push_back({d.id, d.text, {}});
            write_atomic(synth_out, to_jsonl(raw));
            out << "wrote " << raw.size() << " documents to " << synth_out << "\n";
            return kExitOk;
        }
        if (*check) {
            const auto errors = validate_interchange(dfe_path);
            if (errors.empty()) {
                out << dfe_path << ": " << read_interchange(dfe_path).size() << " records, 0 errors\n";
                return kExitOk;
            }
            for (const auto& e : errors) err << e << "\n";
            return kExitData;
        }
        const auto config = resolve_config(common);
        if (*all) {
            for (const auto stage : pipeline_stages()) report(run_stage(stage, config), out);
            return kExitOk;
        }
        for (const auto& [stage, cmd] : stage_commands) {
            if (*cmd) {
                report(run_stage(stage, config), out);
                return kExitOk;
            }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ContractViolation& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace docflow

#include <docflow/pipeline.hpp>

#include <docflow/evaluator.hpp>
#include <docflow/interchange.hpp>
#include <docflow/provider.hpp>
#include <docflow/tfidf.hpp>
#include <docflow/tsne.hpp>
#include <docflow/vectorizer.hpp>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace docflow {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::ingest: return "ingest";
        case Stage::prepare_training: return "prepare-training";
        case Stage::embed_merge_pool: return "embed-merge-pool";
        case Stage::cluster: return "cluster";
        case Stage::evaluate: return "evaluate";
        case Stage::project: return "project";
        case Stage::bench: return "bench";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
    for (const auto s : {Stage::ingest, Stage::prepare_training, Stage::embed_merge_pool, Stage::cluster,
                         Stage::evaluate, Stage::project, Stage::bench})
        if (to_string(s) == name) return s;
    return std::nullopt;
}

const std::vector<Stage>& pipeline_stages() {
    static const std::vector<Stage> stages{Stage::ingest,  Stage::prepare_training, Stage::embed_merge_pool,
                                           Stage::cluster, Stage::evaluate,         Stage::project};
    return stages;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

std::string sha256_file(const fs::path& path) {
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        std::string combined;
        for (const auto& f : files) combined += f.filename().string() + ":" + sha256_file(f) + "\n";
        return sha256_hex(combined);
    }
    return sha256_hex(slurp(path));
}

void write_atomic(const fs::path& path, std::string_view bytes) {
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

WorkspaceLock::WorkspaceLock(const fs::path& workspace) : path_(workspace / artifact::lock) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd >= 0) {
            const auto pid = std::to_string(::getpid()) + "\n";
            [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
            ::close(fd);
            return;
        }
        if (errno != EEXIST) throw IoError("cannot create lock file " + path_.string());

        long holder = 0;
        std::ifstream(path_) >> holder;
        if (holder > 0 && (::kill(static_cast<pid_t>(holder), 0) == 0 || errno == EPERM))
            throw IoError("workspace is locked by running process " + std::to_string(holder) + " (" + path_.string() + ")");
        fs::remove(path_);  // stale
    }
    throw IoError("cannot acquire workspace lock " + path_.string());
}

WorkspaceLock::~WorkspaceLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

std::vector<std::size_t> read_assignments(const fs::path& path, const std::vector<std::string>& ids) {
    std::istringstream in(slurp(path));
    std::string line;
    std::getline(in, line);
    if (line != "doc_id,cluster") throw DataError(path.string() + ": unexpected header");
    std::unordered_map<std::string, std::size_t> by_id;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) throw DataError(path.string() + ": malformed row '" + line + "'");
        by_id[line.substr(0, comma)] = std::stoul(line.substr(comma + 1));
    }
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError(path.string() + ": no assignment for document '" + id + "'");
        out.push_back(it->second);
    }
    return out;
}

namespace {

using Outputs = std::map<std::string, std::string>;

struct StageContext {
    const PipelineConfig& config;
    fs::path ws;
    std::vector<std::string>& notes;

    fs::path at(const char* name) const { return ws / name; }
    fs::path tokens_path() const {
        return config.provider.kind == ProviderKind::files ? config.provider.tokens_path : at(artifact::tokens);
    }
};

const char* producer_of(const std::string& name) {
    static const std::map<std::string, const char*> producers{
        {artifact::clean_corpus, "ingest"},       {artifact::tokens, "prepare-training"},
        {artifact::docvectors, "embed-merge-pool"}, {artifact::assignments, "cluster"},
        {artifact::centroids, "cluster"},
    };
    const auto it = producers.find(name);
    return it == producers.end() ? nullptr : it->second;
}

std::vector<fs::path> stage_inputs(Stage stage, const StageContext& ctx) {
    const auto& c = ctx.config;
    const bool files = c.provider.kind == ProviderKind::files;
    switch (stage) {
        case Stage::ingest: return {c.corpus_path};
        case Stage::prepare_training: {
            std::vector<fs::path> in{ctx.at(artifact::clean_corpus)};
            if (files) in.push_back(c.provider.tokens_path);
            return in;
        }
        case Stage::embed_merge_pool: {
            std::vector<fs::path> in{ctx.at(artifact::clean_corpus), ctx.tokens_path()};
            if (files) in.push_back(c.provider.embeddings_path);
            return in;
        }
        case Stage::cluster: return {ctx.at(artifact::docvectors)};
        case Stage::evaluate:
            return {ctx.at(artifact::docvectors), ctx.at(artifact::assignments), ctx.at(artifact::centroids)};
        case Stage::project: return {ctx.at(artifact::docvectors), ctx.at(artifact::assignments)};
        case Stage::bench: {
            std::vector<fs::path> in{ctx.at(artifact::clean_corpus)};
            if (files) in.push_back(c.provider.tokens_path);
            return in;
        }
    }
    return {};
}

json provider_json(const ProviderConfig& p) {
    return {{"kind", to_string(p.kind)},       {"name", p.name}, {"dimension", p.dimension},
            {"context_noise", p.context_noise}, {"seed", p.seed}, {"tokens_path", p.tokens_path.string()},
            {"embeddings_path", p.embeddings_path.string()}};
}

/// The part of the configuration a stage's outputs depend on.
json stage_config(Stage stage, const PipelineConfig& c) {
    const json inference{{"slot_length", c.inference.length}, {"return_tokens", c.inference.return_tokens}};
    const json kmeans{{"k", c.kmeans.k},
                      {"seed", c.kmeans.seed},
                      {"max_iterations", c.kmeans.max_iterations},
                      {"tolerance", c.kmeans.tolerance},
                      {"normalize_inputs", c.kmeans.normalize_inputs},
                      {"restarts", c.kmeans.restarts}};
    switch (stage) {
        case Stage::ingest: {
            json steps = json::array();
            for (const auto s : c.cleaning.steps) steps.push_back(to_string(s));
            return {{"format", to_string(c.corpus_format)}, {"steps", steps}, {"min_length", c.cleaning.min_length}};
        }
        case Stage::prepare_training:
            return {{"slot_length", c.training.slot.length},
                    {"return_tokens", c.training.slot.return_tokens},
                    {"mode", to_string(c.training.mode)},
                    {"batch_size", c.training.batch_size},
                    {"separator", c.training.separator_token},
                    {"objective", to_string(c.training.objective)},
                    {"mask",
                     {c.mask.rate, c.mask.mask_fraction, c.mask.random_fraction, c.mask.keep_fraction, c.mask.seed,
                      c.mask.mask_token, c.mask.vocab_size}},
                    {"inference", inference},
                    {"provider", provider_json(c.provider)}};
        case Stage::embed_merge_pool: return {{"inference", inference}, {"provider", provider_json(c.provider)}};
        case Stage::cluster: return {{"kmeans", kmeans}, {"k_set", c.k_set}};
        case Stage::evaluate: return {{"normalize_inputs", c.kmeans.normalize_inputs}};
        case Stage::project:
            return {{"perplexity", c.projection.perplexity},
                    {"iterations", c.projection.iterations},
                    {"learning_rate", c.projection.learning_rate},
                    {"seed", c.projection.seed},
                    {"normalize_inputs", c.kmeans.normalize_inputs}};
        case Stage::bench:
            return {{"inference", inference},
                    {"provider", provider_json(c.provider)},
                    {"max_docs", c.bench.max_docs},
                    {"latency_ms", c.bench.latency_ms}};
    }
    return {};
}

// With the stub provider, prepare-training and bench tokenize afresh; embed-merge-pool reads tokens.jsonl.
std::vector<TokenizedDocument> load_tokens(const StageContext& ctx, const std::vector<CleanDocument>& docs,
                                           bool fresh) {
    if (ctx.config.provider.kind == ProviderKind::stub && fresh) {
        const StubTokenizer tokenizer;
        std::vector<TokenizedDocument> out;
        for (const auto& d : docs) out.push_back(tokenizer.tokenize(d));
        return out;
    }
    auto all = read_tokens_jsonl(ctx.tokens_path());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < all.size(); ++i) index.emplace(all[i].doc_id, i);
    std::vector<TokenizedDocument> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        const auto it = index.find(d.id);
        if (it == index.end()) throw DataError("no tokenization for document '" + d.id + "' in " + ctx.tokens_path().string());
        out.push_back(std::move(all[it->second]));
    }
    return out;
}

Outputs run_ingest(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto store = ingest_corpus(c.corpus_path, c.corpus_format);
    auto cleaned = clean_corpus(store, c.cleaning);
    ctx.notes.push_back("ingested " + std::to_string(store.size()) + " documents, excluded " +
                        std::to_string(cleaned.exclusions.size()));
    for (const auto& [id, reason] : cleaned.exclusions) ctx.notes.push_back("excluded " + id + ": " + reason);
    if (cleaned.documents.empty()) throw DataError("every document was excluded by the cleaning policy");
    return {{artifact::clean_corpus, to_jsonl(cleaned.documents)},
            {artifact::exclusions, exclusions_to_json(cleaned.exclusions)}};
}

Outputs run_prepare_training(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto docs = read_clean_corpus(ctx.at(artifact::clean_corpus));
    const auto tokenized = load_tokens(ctx, docs, true);

    Outputs out;
    if (c.provider.kind == ProviderKind::stub) out[artifact::tokens] = tokens_to_jsonl(tokenized);

    std::string samples;
    std::size_t window_count = 0, dropped = 0;
    const auto batches = concatenate_batches(tokenized, c.training.batch_size, c.training.separator_token);
    for (const auto& batch : batches) {
        const auto slots = c.training.mode == TrainingSlotMode::fixed
                               ? slot_fixed(batch.tokens.size(), c.training.slot.length, batch.batch_id)
                               : slot_overlap(batch.tokens.size(), c.training.slot, batch.batch_id);
        dropped += slots.dropped;
        for (const auto& w : slots.windows) {
            const std::span<const TokenId> tokens(batch.tokens.data() + w.start, w.size());
            MaskedWindow masked;
            if (c.training.objective == TrainingObjective::mlm) {
                std::vector<bool> maskable(tokens.size());
                for (std::size_t i = 0; i < tokens.size(); ++i) maskable[i] = tokens[i] != c.training.separator_token;
                masked = apply_mlm_mask(tokens, c.mask, maskable, window_seed(c.mask.seed, batch.batch_id, w.start));
            } else {
                masked = apply_clm(tokens);
            }
            json labels = json::array();
            for (const auto& [pos, original] : masked.labels) labels.push_back({pos, original});
            samples += json{{"batch_id", batch.batch_id}, {"start", w.start}, {"tokens", masked.tokens},
                            {"mlm_labels", labels}}
                           .dump();
            samples += '\n';
            ++window_count;
        }
    }
    out[artifact::training_samples] = std::move(samples);

    std::vector<Window> windows;
    for (const auto& d : tokenized) {
        auto w = inference_windows(d, c.inference);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    out[artifact::windows] = windows_to_csv(windows);
    out[artifact::training_stats] = json{{"batches", batches.size()},
                                         {"training_windows", window_count},
                                         {"dropped_tokens", dropped},
                                         {"inference_windows", windows.size()},
                                         {"objective", to_string(c.training.objective)},
                                         {"mode", to_string(c.training.mode)}}
                                        .dump(2) +
                                    "\n";
    ctx.notes.push_back(std::to_string(batches.size()) + " batches, " + std::to_string(window_count) +
                        " training windows, " + std::to_string(dropped) + " tokens dropped, " +
                        std::to_string(windows.size()) + " inference windows");
    return out;
}

Outputs run_embed_merge_pool(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto docs = read_clean_corpus(ctx.at(artifact::clean_corpus));
    const auto tokenized = load_tokens(ctx, docs, false);
    const auto tfidf = TfIdfModel::fit(docs);

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < docs.size(); ++i) index.emplace(docs[i].id, i);

    std::vector<std::optional<DocVector>> pooled(docs.size());
    json fallback = json::array(), excluded = json::array();
    const auto pool_record = [&](const InterchangeRecord& record) {
        const auto it = index.find(record.doc_id);
        if (it == index.end()) throw DataError("embeddings for unknown document '" + record.doc_id + "'");
        const auto& tok = tokenized[it->second];
        if (record.length != tok.tokens.size() || record.alignment != tok.alignment)
            throw DataError("document '" + record.doc_id + "': embeddings do not match its tokenization");
        const auto seq = merge_window_embeddings<float>(record.windows, record.length, record.doc_id, record.alignment);
        auto vec = pool_document(seq, docs[it->second], tfidf);
        if (vec.unweighted_fallback) fallback.push_back(record.doc_id);
        pooled[it->second] = std::move(vec);
    };

    Outputs out;
    if (c.provider.kind == ProviderKind::stub) {
        StubProvider provider({c.provider.dimension, c.provider.context_noise, {}, c.provider.seed, c.provider.name});
        std::string dfe;
        for (const auto& tok : tokenized) {
            const auto windows = inference_windows(tok, c.inference);
            InterchangeRecord record{tok.doc_id, tok.tokens.size(), tok.alignment, provider.embed(tok, windows)};
            dfe += encode_interchange(record);
            pool_record(record);
        }
        out[artifact::embeddings] = std::move(dfe);
    } else {
        InterchangeReader reader(c.provider.embeddings_path);
        while (auto record = reader.next()) pool_record(*record);
    }

    DocVectorStore store;
    std::vector<const DocVector*> kept;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (!pooled[i]) throw DataError("no embeddings for document '" + docs[i].id + "'");
        if (!(pooled[i]->norm > 0.0)) {
            excluded.push_back(docs[i].id);
            continue;
        }
        kept.push_back(&*pooled[i]);
    }
    if (kept.empty()) throw DataError("no document produced a usable vector");
    store.vectors.resize(static_cast<Eigen::Index>(kept.size()), kept.front()->vector.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        store.ids.push_back(kept[i]->doc_id);
        store.vectors.row(static_cast<Eigen::Index>(i)) = kept[i]->vector.transpose();
    }
    out[artifact::docvectors] = encode_docvectors(store);
    out[artifact::docvector_index] = docvector_index_csv(store);
    out[artifact::pooling_report] = json{{"documents", store.ids.size()},
                                         {"dimension", store.vectors.cols()},
                                         {"vocabulary", tfidf.vocabulary_size()},
                                         {"unweighted_fallback", fallback},
                                         {"excluded_zero_norm", excluded}}
                                        .dump(2) +
                                    "\n";
    ctx.notes.push_back("pooled " + std::to_string(store.ids.size()) + " document vectors (D=" +
                        std::to_string(store.vectors.cols()) + ")");
    return out;
}

MatrixXr model_space(const DocVectorStore& store, const PipelineConfig& c) {
    return c.kmeans.normalize_inputs ? normalize_rows(store.vectors, store.ids) : store.vectors;
}

std::string compact(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

Outputs run_cluster(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto store = read_docvectors(ctx.at(artifact::docvectors));
    const auto n = store.ids.size();
    const MatrixXr data = model_space(store, c);

    KMeansConfig km = c.kmeans;
    km.normalize_inputs = false;
    std::string elbow_csv = "k,inertia,knee_score\n";
    json summary;
    if (c.kmeans.k == 0) {
        std::vector<std::size_t> candidates;
        for (const auto k : c.k_set)
            if (k <= n) candidates.push_back(k);
        if (candidates.size() < 3)
            throw DataError("only " + std::to_string(n) + " documents: fewer than 3 k candidates are feasible");
        const auto elbow = select_k_elbow(data, candidates, km);
        for (std::size_t i = 0; i < elbow.candidates.size(); ++i)
            elbow_csv += std::to_string(elbow.candidates[i].first) + "," + compact(elbow.candidates[i].second) + "," +
                         compact(elbow.knee_scores[i]) + "\n";
        km.k = elbow.chosen_k;
        summary["chosen_by"] = "elbow";
        summary["monotonicity_violations"] = elbow.monotonicity_violations;
        for (const auto k : elbow.monotonicity_violations)
            ctx.notes.push_back("warning: inertia increased at k=" + std::to_string(k));
    } else {
        if (km.k > n) throw DataError("kmeans.k=" + std::to_string(km.k) + " exceeds the " + std::to_string(n) + " documents");
        summary["chosen_by"] = "config";
    }

    const auto model = kmeans_fit(data, km);
    if (c.kmeans.k != 0) elbow_csv += std::to_string(km.k) + "," + compact(model.inertia) + ",0\n";

    std::string assignments = "doc_id,cluster\n";
    for (std::size_t i = 0; i < n; ++i) assignments += store.ids[i] + "," + std::to_string(model.assignments[i]) + "\n";

    DocVectorStore centroids;
    centroids.vectors = model.centroids;
    for (std::size_t k = 0; k < model.k(); ++k) centroids.ids.push_back("centroid-" + std::to_string(k));

    summary["k"] = km.k;
    summary["inertia"] = model.inertia;
    summary["iterations_run"] = model.iterations_run;
    summary["inertia_history"] = model.inertia_history;
    summary["normalize_inputs"] = c.kmeans.normalize_inputs;
    ctx.notes.push_back("k=" + std::to_string(km.k) + " (" + summary["chosen_by"].get<std::string>() +
                        "), inertia " + compact(model.inertia));
    return {{artifact::elbow, elbow_csv},
            {artifact::assignments, assignments},
            {artifact::centroids, encode_docvectors(centroids)},
            {artifact::cluster_summary, summary.dump(2) + "\n"}};
}

Outputs run_evaluate(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto store = read_docvectors(ctx.at(artifact::docvectors));
    const auto centroids = read_docvectors(ctx.at(artifact::centroids));
    ClusterModel<double> model;
    model.centroids = centroids.vectors;
    model.assignments = read_assignments(ctx.at(artifact::assignments), store.ids);
    const auto report = centroid_similarity_stats(model, model_space(store, c));
    ctx.notes.push_back("groups " + std::to_string(report.centroid_summary.groups) + ", centroid mean " +
                        compact(report.centroid_summary.mean) + ", pairwise mean " + compact(report.pairwise_summary.mean));
    return {{artifact::report_json, report_to_json(report)}, {artifact::report_csv, report_to_csv(report)}};
}

Outputs run_project(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto store = read_docvectors(ctx.at(artifact::docvectors));
    const auto clusters = read_assignments(ctx.at(artifact::assignments), store.ids);
    const auto result = project_tsne(model_space(store, c), c.projection);
    ctx.notes.push_back("t-SNE KL " + compact(result.initial_kl) + " -> " + compact(result.final_kl));
    return {{artifact::projection, projection_to_csv(store.ids, result.embedding, clusters)}};
}

Outputs run_bench(const StageContext& ctx) {
    const auto& c = ctx.config;
    const auto docs = read_clean_corpus(ctx.at(artifact::clean_corpus));
    auto tokenized = load_tokens(ctx, docs, true);
    if (c.bench.max_docs > 0 && tokenized.size() > c.bench.max_docs) tokenized.resize(c.bench.max_docs);
    StubProvider provider({c.provider.dimension, c.provider.context_noise,
                           std::chrono::microseconds(static_cast<long long>(c.bench.latency_ms * 1000.0)),
                           c.provider.seed, c.provider.name});
    const auto report = measure_throughput(provider, tokenized, c.inference);
    ctx.notes.push_back(report.provider_name + ": " + compact(report.docs_per_minute) + " docs/min");
    return {{artifact::throughput, throughput_to_csv(std::span(&report, 1))}};
}

json load_manifest(const fs::path& path) {
    if (!fs::exists(path)) return json{{"stages", json::object()}};
    try {
        auto m = json::parse(slurp(path));
        if (m.contains("stages") && m["stages"].is_object()) return m;
    } catch (const json::exception&) {
    }
    return json{{"stages", json::object()}};
}

}  // namespace

StageOutcome run_stage(Stage stage, const PipelineConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    StageOutcome outcome{stage, false, 0.0, {}, {}};
    fs::create_directories(config.workspace);
    WorkspaceLock lock(config.workspace);
    StageContext ctx{config, config.workspace, outcome.notes};

    const auto inputs = stage_inputs(stage, ctx);
    json input_hashes = json::object();
    for (const auto& in : inputs) {
        if (!fs::exists(in)) {
            const auto name = in.filename().string();
            const char* producer = in.parent_path() == ctx.ws ? producer_of(name) : nullptr;
            throw DataError("missing upstream artifact " + in.string() +
                            (producer ? std::string(" (run stage '") + producer + "' first)" : std::string()));
        }
        input_hashes[in.string()] = sha256_file(in);
    }
    const auto config_hash = sha256_hex(stage_config(stage, config).dump());

    const auto manifest_path = ctx.at(artifact::manifest);
    auto manifest = load_manifest(manifest_path);
    const std::string key(to_string(stage));
    if (manifest["stages"].contains(key)) {
        const auto& prev = manifest["stages"][key];
        bool unchanged = prev.value("inputs", json::object()) == input_hashes && prev.value("config_hash", "") == config_hash;
        if (unchanged) {
            const json recorded = prev.value("outputs", json::object());
            for (const auto& [name, hash] : recorded.items()) {
                const auto p = ctx.ws / name;
                if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) {
                    unchanged = false;
                    break;
                }
                outcome.outputs.push_back(name);
            }
        }
        if (unchanged) {
            outcome.skipped = true;
            manifest["stages"][key]["status"] = "skipped";
            write_atomic(manifest_path, manifest.dump(2) + "\n");
            outcome.notes.push_back("inputs, config and outputs unchanged");
            return outcome;
        }
        outcome.outputs.clear();
    }

    Outputs outputs;
    switch (stage) {
        case Stage::ingest: outputs = run_ingest(ctx); break;
        case Stage::prepare_training: outputs = run_prepare_training(ctx); break;
        case Stage::embed_merge_pool: outputs = run_embed_merge_pool(ctx); break;
        case Stage::cluster: outputs = run_cluster(ctx); break;
        case Stage::evaluate: outputs = run_evaluate(ctx); break;
        case Stage::project: outputs = run_project(ctx); break;
        case Stage::bench: outputs = run_bench(ctx); break;
    }

    json output_hashes = json::object();
    for (const auto& [name, bytes] : outputs) {
        write_atomic(ctx.ws / name, bytes);
        output_hashes[name] = sha256_hex(bytes);
        outcome.outputs.push_back(name);
    }
    outcome.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    manifest["stages"][key] = {{"stage", key},
                               {"status", "ran"},
                               {"inputs", input_hashes},
                               {"config_hash", config_hash},
                               {"outputs", output_hashes},
                               {"duration_s", outcome.duration_seconds}};
    write_atomic(manifest_path, manifest.dump(2) + "\n");
    return outcome;
}

}  // namespace docflow

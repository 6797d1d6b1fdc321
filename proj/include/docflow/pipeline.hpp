#pragma once

#include <docflow/config.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace docflow {

enum class Stage { ingest, prepare_training, embed_merge_pool, cluster, evaluate, project, bench };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

/// The six processing stages in order (bench is run on demand).
const std::vector<Stage>& pipeline_stages();

// Fixed artifact names inside the workspace.
namespace artifact {
inline constexpr const char* clean_corpus = "clean.jsonl";
inline constexpr const char* exclusions = "exclusions.json";
inline constexpr const char* tokens = "tokens.jsonl";
inline constexpr const char* training_samples = "training_samples.jsonl";
inline constexpr const char* training_stats = "training_stats.json";
inline constexpr const char* windows = "windows.csv";
inline constexpr const char* embeddings = "embeddings.dfe";
inline constexpr const char* docvectors = "docvectors.bin";
inline constexpr const char* docvector_index = "docvectors.csv";
inline constexpr const char* pooling_report = "pooling.json";
inline constexpr const char* elbow = "elbow.csv";
inline constexpr const char* assignments = "assignments.csv";
inline constexpr const char* centroids = "centroids.bin";
inline constexpr const char* cluster_summary = "cluster.json";
inline constexpr const char* report_json = "report.json";
inline constexpr const char* report_csv = "report.csv";
inline constexpr const char* projection = "projection.csv";
inline constexpr const char* throughput = "throughput.csv";
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* lock = ".docflow.lock";
}  // namespace artifact

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Exclusive workspace lock held for the lifetime of the object. A lock left
/// by a process that no longer exists is taken over.
class WorkspaceLock {
public:
    explicit WorkspaceLock(const std::filesystem::path& workspace);
    ~WorkspaceLock();
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;

private:
    std::filesystem::path path_;
};

struct StageOutcome {
    Stage stage;
    bool skipped = false;
    double duration_seconds = 0.0;
    std::vector<std::string> outputs;
    std::vector<std::string> notes;  // human-readable log lines
};

/**
 * Runs one stage against the workspace. Upstream artifacts must exist
 * (DataError naming the missing file otherwise). Outputs are written
 * atomically and recorded in manifest.json with input/config hashes; a
 * stage whose inputs, config and outputs are unchanged is skipped.
 */
StageOutcome run_stage(Stage stage, const PipelineConfig& config);

/// Reads an assignments CSV (`doc_id,cluster`) and returns the cluster of each of `ids`, in order.
std::vector<std::size_t> read_assignments(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace docflow

#pragma once

#include <docflow/chunker.hpp>
#include <docflow/corpus.hpp>
#include <docflow/kmeans.hpp>
#include <docflow/tsne.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace docflow {

enum class TrainingObjective { mlm, clm };
enum class TrainingSlotMode { fixed, overlap };
enum class ProviderKind { stub, files };

struct TrainingConfig {
    SlotSpec slot{128, 32};
    TrainingSlotMode mode = TrainingSlotMode::overlap;
    std::size_t batch_size = 1000;
    TokenId separator_token = -1;  // < 0: no separator between documents
    TrainingObjective objective = TrainingObjective::mlm;
};

struct ProviderConfig {
    ProviderKind kind = ProviderKind::stub;
    std::string name = "stub";
    std::size_t dimension = 64;
    double context_noise = 0.05;
    std::uint64_t seed = 7;
    std::filesystem::path tokens_path;      // kind == files
    std::filesystem::path embeddings_path;  // kind == files
};

struct BenchConfig {
    std::size_t max_docs = 100;  // 0 = all documents
    double latency_ms = 10.0;    // simulated per-document cost of the stub provider
};

struct PipelineConfig {
    std::filesystem::path corpus_path;
    CorpusFormat corpus_format = CorpusFormat::jsonl;
    std::filesystem::path workspace = "workspace";
    CleaningPolicy cleaning;
    TrainingConfig training;
    SlotSpec inference{510, 64};
    MaskPolicy mask;
    KMeansConfig kmeans{.k = 0};  // k = 0 selects k with the elbow method
    std::vector<std::size_t> k_set = default_k_candidates();
    ProjectionConfig projection;
    ProviderConfig provider;
    BenchConfig bench;

    /// Checks every numeric invariant; throws ConfigError citing the field and bound.
    void validate() const;
};

/**
 * Parses a YAML configuration. Relative paths are resolved against the
 * config file's directory. Unknown keys and invariant violations raise
 * ConfigError naming the key or field; a missing corpus path raises ConfigError.
 */
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& yaml, const std::filesystem::path& base_dir = {});

/// Full configuration with every default made explicit.
std::string config_to_yaml(const PipelineConfig& config);

std::string_view to_string(TrainingObjective objective);
std::string_view to_string(TrainingSlotMode mode);
std::string_view to_string(ProviderKind kind);

}  // namespace docflow

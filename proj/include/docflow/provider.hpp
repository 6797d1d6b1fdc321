#pragma once

#include <docflow/chunker.hpp>
#include <docflow/corpus.hpp>
#include <docflow/vectorizer.hpp>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace docflow {

/// Source of per-window token embeddings (a transformer in production, a stub in tests).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dimension() const = 0;
    /// One matrix per window, rows = window tokens (no special-token rows).
    virtual std::vector<WindowEmbeddings<float>> embed(const TokenizedDocument& doc,
                                                       std::span<const Window> windows) = 0;
};

/**
 * Deterministic stand-in for a model: every token id maps to a fixed
 * pseudo-random vector; each window adds small position noise so that
 * overlapping windows disagree slightly, as contextual embeddings do.
 * An optional per-document latency simulates model cost.
 */
class StubProvider final : public EmbeddingProvider {
public:
    struct Options {
        std::size_t dimension = 64;
        double context_noise = 0.05;
        std::chrono::microseconds latency{0};
        std::uint64_t seed = 7;
        std::string name = "stub";
    };

    StubProvider() : StubProvider(Options{}) {}
    explicit StubProvider(Options options);

    std::string name() const override { return options_.name; }
    std::size_t dimension() const override { return options_.dimension; }
    std::vector<WindowEmbeddings<float>> embed(const TokenizedDocument& doc, std::span<const Window> windows) override;

    /// The context-free vector of a token.
    const VectorXr& token_vector(TokenId token);

private:
    Options options_;
    std::unordered_map<TokenId, VectorXr> cache_;
};

/**
 * Word-piece-like stand-in tokenizer: each word becomes one token, or
 * several when longer than `piece_length` code points; ids are hashed into
 * [first_id, first_id + vocab). Alignment points at the parent word.
 */
class StubTokenizer {
public:
    static constexpr TokenId kFirstId = 5;  // 0..4 reserved for special tokens, 4 = mask
    static constexpr TokenId kVocab = 30000;

    explicit StubTokenizer(std::size_t piece_length = 8) : piece_length_(piece_length) {}

    TokenizedDocument tokenize(const CleanDocument& doc) const;

private:
    std::size_t piece_length_;
};

/// Tokenized documents as JSONL: `{"id", "tokens": [...], "alignment": [...]}`.
std::string tokens_to_jsonl(std::span<const TokenizedDocument> docs);
std::vector<TokenizedDocument> read_tokens_jsonl(const std::filesystem::path& path);

}  // namespace docflow

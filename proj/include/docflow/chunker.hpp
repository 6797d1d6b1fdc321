#pragma once

#include <docflow/types.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace docflow {

/// Subword token ids of one document and, per token, the index of its parent
/// word in CleanDocument::words (-1 for special tokens).
struct TokenizedDocument {
    std::string doc_id;
    std::vector<TokenId> tokens;
    std::vector<std::int32_t> alignment;

    /// Throws DataError if lengths differ or alignment decreases over non-special tokens.
    void validate() const;
};

/// Window length and number of return tokens (overlap with the previous window).
struct SlotSpec {
    std::size_t length = 128;
    std::size_t return_tokens = 32;

    std::size_t stride() const { return length - return_tokens; }
    /// Throws ContractViolation unless length >= 2 and return_tokens < length.
    void validate() const;
};

enum class WindowKind { initial, intermediate, final, whole };

std::string_view to_string(WindowKind kind);
WindowKind parse_window_kind(std::string_view name);

/// Half-open token span [start, end) of a document or batch.
struct Window {
    std::string owner;  // doc_id or batch_id
    std::size_t start = 0;
    std::size_t end = 0;
    WindowKind kind = WindowKind::whole;

    std::size_t size() const { return end - start; }
    bool contains(std::size_t pos) const { return pos >= start && pos < end; }
    friend bool operator==(const Window&, const Window&) = default;
};

struct SlotResult {
    std::vector<Window> windows;
    std::size_t dropped = 0;  // tokens not covered by any window
};

/// Disjoint windows [0,N), [N,2N), ...; a trailing remainder shorter than N is dropped.
SlotResult slot_fixed(std::size_t sequence_length, std::size_t window_length, std::string owner = {});

/**
 * Overlapping windows: the first N tokens, then windows advancing by N - K
 * while they fit, then the last N tokens unless that window was already
 * emitted. A sequence shorter than N yields no windows and reports all of its
 * tokens as dropped.
 */
SlotResult slot_overlap(std::size_t sequence_length, const SlotSpec& spec, std::string owner = {});

/// Same rule as slot_overlap, but a document shorter than the slot yields a
/// single whole-document window. Throws DataError for an empty document.
std::vector<Window> inference_windows(const TokenizedDocument& doc, const SlotSpec& spec = {510, 64});

struct MaskPolicy {
    double rate = 0.15;
    double mask_fraction = 0.8;
    double random_fraction = 0.1;
    double keep_fraction = 0.1;
    std::uint64_t seed = 0;
    TokenId mask_token = 4;
    TokenId vocab_size = 30005;  // random substitutions draw from [0, vocab_size)

    /// Throws ContractViolation for rate outside [0,1] or proportions that are
    /// negative or do not sum to 1 within 1e-9.
    void validate() const;
};

struct MaskedWindow {
    std::vector<TokenId> tokens;
    std::vector<std::pair<std::size_t, TokenId>> labels;  // (position, original id), ascending
};

/// Seed for one window derived from the policy seed and the window identity,
/// so masks do not depend on processing order.
std::uint64_t window_seed(std::uint64_t policy_seed, std::string_view owner, std::size_t start);

/**
 * Selects exactly round(rate * |maskable|) maskable positions uniformly
 * without replacement and substitutes each with the mask token, a random
 * token or itself according to the policy proportions.
 */
MaskedWindow apply_mlm_mask(std::span<const TokenId> tokens, const MaskPolicy& policy,
                            const std::vector<bool>& maskable, std::uint64_t seed);

/// Causal-LM samples need no masking.
inline MaskedWindow apply_clm(std::span<const TokenId> tokens) {
    return {std::vector<TokenId>(tokens.begin(), tokens.end()), {}};
}

struct TokenBatch {
    std::string batch_id;
    std::vector<TokenId> tokens;
};

/// Concatenates documents in order, `batch_size` documents per batch. A
/// non-negative separator is inserted between consecutive documents.
std::vector<TokenBatch> concatenate_batches(std::span<const TokenizedDocument> docs, std::size_t batch_size,
                                            TokenId separator = -1);

/// Window manifest CSV: header `doc_id,start,end,kind`.
std::string windows_to_csv(std::span<const Window> windows);
std::vector<Window> windows_from_csv(std::string_view csv);

}  // namespace docflow

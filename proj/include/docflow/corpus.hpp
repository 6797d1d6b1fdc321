#pragma once

#include <docflow/types.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace docflow {

struct RawDocument {
    std::string id;
    std::string text;
};

/// Ordered document collection; iteration order is ingestion order.
using CorpusStore = std::vector<RawDocument>;

enum class CorpusFormat { jsonl, directory };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

/**
 * Reads a corpus from a JSONL file (one `{"id", "text"}` object per line) or
 * from a directory of `.txt` files (file stem is the id, files visited in
 * lexicographic order).
 *
 * Throws DataError for duplicate ids or malformed records (the message names
 * the id or the 1-based line number) and IoError for unreadable paths.
 */
CorpusStore ingest_corpus(const std::filesystem::path& path, CorpusFormat format);

enum class CleaningStep { strip_markup, unicode_normalize, lowercase, collapse_whitespace };

CleaningStep parse_cleaning_step(std::string_view name);
std::string_view to_string(CleaningStep step);

struct CleaningPolicy {
    std::vector<CleaningStep> steps{CleaningStep::strip_markup, CleaningStep::unicode_normalize,
                                    CleaningStep::lowercase, CleaningStep::collapse_whitespace};
    std::size_t min_length = 50;  // in code points

    /// Throws ContractViolation if steps is empty, repeats a step, or min_length is 0.
    void validate() const;
};

struct CleanDocument {
    std::string id;
    std::string text;
    std::vector<std::string> words;
};

/// Either a cleaned document or the reason it was excluded.
struct CleanResult {
    std::optional<CleanDocument> document;
    std::string exclusion_reason;

    bool excluded() const { return !document.has_value(); }
};

/**
 * Applies the policy steps in order. Leading and trailing whitespace is
 * always trimmed from the result; a result that is empty or shorter than
 * min_length code points is reported as excluded rather than thrown.
 */
CleanResult clean_text(const RawDocument& raw, const CleaningPolicy& policy);

/// Maximal runs of Unicode letters and decimal digits, in order.
std::vector<std::string> word_tokenize(std::string_view text);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

struct CleanedCorpus {
    std::vector<CleanDocument> documents;
    std::map<std::string, std::string> exclusions;  // id -> reason
};

CleanedCorpus clean_corpus(const CorpusStore& corpus, const CleaningPolicy& policy);

/// Cleaned corpus as JSONL with the ingest schema (`id`, `text`).
std::string to_jsonl(const std::vector<CleanDocument>& documents);
/// Exclusions report, a JSON object id -> reason.
std::string exclusions_to_json(const std::map<std::string, std::string>& exclusions);

/// Reads a cleaned JSONL corpus back; words are re-derived with word_tokenize.
std::vector<CleanDocument> read_clean_corpus(const std::filesystem::path& path);

}  // namespace docflow

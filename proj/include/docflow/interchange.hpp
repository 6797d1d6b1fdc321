#pragma once

#include <docflow/vectorizer.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace docflow {

/**
 * Token-embedding interchange ("DFE1"), one record per document, records
 * concatenated in one file. All integers are little-endian.
 *
 *   char[4]  magic "DFE1"
 *   u32      doc_id byte length, followed by the UTF-8 doc_id bytes
 *   u32      token count L
 *   u32      dimension D
 *   u32      window count W
 *   W x {u32 start, u32 end}
 *   L x i32  token -> word alignment (-1 for special tokens)
 *   W x ((end - start) x D) float32, row-major
 */
struct InterchangeRecord {
    std::string doc_id;
    std::size_t length = 0;
    std::vector<std::int32_t> alignment;
    std::vector<WindowEmbeddings<float>> windows;

    std::size_t dimension() const { return windows.empty() ? 0 : static_cast<std::size_t>(windows.front().matrix.cols()); }
};

inline constexpr char kInterchangeMagic[4] = {'D', 'F', 'E', '1'};
inline constexpr char kDocVectorMagic[4] = {'D', 'F', 'V', '1'};

/// Serializes one record. Throws ContractViolation for inconsistent records.
std::string encode_interchange(const InterchangeRecord& record);

/// Structural checks shared by the reader and the writer: window bounds,
/// ordering, coverage, row counts and alignment. Throws DataError.
void validate_record(const InterchangeRecord& record);

/// Sequential reader over a DFE1 file. Every record is validated on read.
class InterchangeReader {
public:
    explicit InterchangeReader(const std::filesystem::path& path);

    /// Next record, or nullopt at a clean end of file. Throws DataError on a
    /// truncated or malformed record (message carries the record index).
    std::optional<InterchangeRecord> next();

private:
    std::ifstream in_;
    std::string path_;
    std::size_t index_ = 0;
};

std::vector<InterchangeRecord> read_interchange(const std::filesystem::path& path);

/// Reads the whole file and returns every validation error found (empty when valid).
std::vector<std::string> validate_interchange(const std::filesystem::path& path);

/**
 * DocVector store ("DFV1"): magic, u32 count, u32 D, then per document
 * {u32 id length, id bytes, D x float64}. Little-endian.
 */
struct DocVectorStore {
    std::vector<std::string> ids;
    MatrixXr vectors;  // one row per document
};

std::string encode_docvectors(const DocVectorStore& store);
DocVectorStore decode_docvectors(std::string_view bytes);
DocVectorStore read_docvectors(const std::filesystem::path& path);

/// CSV index `doc_id,row`.
std::string docvector_index_csv(const DocVectorStore& store);

}  // namespace docflow

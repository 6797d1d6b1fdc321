#pragma once

#include <docflow/chunker.hpp>
#include <docflow/corpus.hpp>
#include <docflow/tfidf.hpp>
#include <docflow/types.hpp>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace docflow {

/// Model output for one window: one row per token of the window.
template <typename Scalar>
struct WindowEmbeddings {
    Window window;
    RowMatrix<Scalar> matrix;
};

/// One embedding row per document token position, after overlap reconciliation.
template <typename Scalar>
struct TokenEmbeddingSeq {
    std::string doc_id;
    RowMatrix<Scalar> matrix;
    std::vector<std::int32_t> alignment;
};

struct DocVector {
    std::string doc_id;
    VectorXr vector;
    double norm = 0.0;
    bool unweighted_fallback = false;  // all TF-IDF weights were zero
};

/**
 * For each position in [0, length), the index of the window whose row it
 * takes. The overlap between consecutive windows is split in half: the
 * earlier half comes from the previous window and the later half from the
 * current one, with the extra position of an odd overlap going to the
 * previous window.
 *
 * Windows must be sorted by start, begin at 0, end at `length` and leave no
 * gap; a gap is reported as a DataError naming the missing range.
 */
std::vector<std::size_t> merge_assignment(std::span<const Window> windows, std::size_t length);

/// First position owned by each window (the partition boundaries of merge_assignment).
std::vector<std::size_t> merge_boundaries(std::span<const Window> windows, std::size_t length);

template <typename Scalar>
TokenEmbeddingSeq<Scalar> merge_window_embeddings(std::span<const WindowEmbeddings<Scalar>> windows,
                                                  std::size_t length, std::string doc_id = {},
                                                  std::vector<std::int32_t> alignment = {}) {
    if (windows.empty()) throw DataError("document " + doc_id + ": no windows to merge");
    const Eigen::Index dim = windows.front().matrix.cols();

    std::vector<Window> spans;
    spans.reserve(windows.size());
    for (const auto& w : windows) {
        if (static_cast<std::size_t>(w.matrix.rows()) != w.window.size())
            throw DataError("document " + doc_id + ": window [" + std::to_string(w.window.start) + "," +
                            std::to_string(w.window.end) + ") has " + std::to_string(w.matrix.rows()) + " rows");
        if (w.matrix.cols() != dim) throw DataError("document " + doc_id + ": inconsistent embedding dimension");
        spans.push_back(w.window);
    }

    const auto bounds = merge_boundaries(spans, length);
    TokenEmbeddingSeq<Scalar> seq{std::move(doc_id), RowMatrix<Scalar>(static_cast<Eigen::Index>(length), dim),
                                  std::move(alignment)};
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const std::size_t begin = bounds[w];
        const std::size_t end = w + 1 < windows.size() ? bounds[w + 1] : length;
        if (end <= begin) continue;
        const auto offset = static_cast<Eigen::Index>(begin - windows[w].window.start);
        const auto count = static_cast<Eigen::Index>(end - begin);
        seq.matrix.middleRows(static_cast<Eigen::Index>(begin), count) = windows[w].matrix.middleRows(offset, count);
    }
    return seq;
}

/// Convex combination sum_i w_i * row_i / sum_i w_i. Requires sum w > 0.
template <typename RowsDerived, typename WeightsDerived>
VectorXr weighted_mean(const Eigen::MatrixBase<RowsDerived>& rows, const Eigen::MatrixBase<WeightsDerived>& weights) {
    const VectorXr w = weights.template cast<double>();
    const double total = w.sum();
    if (!(total > 0.0)) throw ContractViolation("weighted_mean needs a positive total weight");
    return (rows.template cast<double>().transpose() * w) / total;
}

/**
 * TF-IDF weighted mean of the token rows. Each row inherits the weight of the
 * word it is aligned to; rows aligned to special tokens (-1) are skipped. If
 * every weight is zero the plain mean of the non-special rows is used and the
 * result is flagged.
 */
template <typename Scalar>
DocVector pool_document(const TokenEmbeddingSeq<Scalar>& seq, const CleanDocument& doc, const TfIdfModel& model) {
    const auto length = static_cast<std::size_t>(seq.matrix.rows());
    if (length == 0) throw DataError("document " + seq.doc_id + ": no token rows to pool");
    if (seq.alignment.size() != length)
        throw DataError("document " + seq.doc_id + ": alignment length does not match token rows");

    for (std::size_t i = 0; i < length; ++i) {
        if (!seq.matrix.row(static_cast<Eigen::Index>(i)).allFinite())
            throw DataError("document " + seq.doc_id + ": non-finite embedding at token " + std::to_string(i));
    }

    const auto word_weights = model.word_weights(doc);
    std::vector<Eigen::Index> content_rows;
    VectorXr weights(static_cast<Eigen::Index>(length));
    Eigen::Index n = 0;
    for (std::size_t i = 0; i < length; ++i) {
        const auto a = seq.alignment[i];
        if (a < 0) continue;
        if (static_cast<std::size_t>(a) >= word_weights.size())
            throw DataError("document " + seq.doc_id + ": token " + std::to_string(i) + " aligned to word " +
                            std::to_string(a) + " but the document has " + std::to_string(word_weights.size()) +
                            " words");
        content_rows.push_back(static_cast<Eigen::Index>(i));
        weights(n++) = word_weights[static_cast<std::size_t>(a)];
    }
    if (content_rows.empty()) throw DataError("document " + seq.doc_id + ": only special tokens");
    weights.conservativeResize(n);

    const RowMatrix<Scalar> rows = seq.matrix(content_rows, Eigen::all);
    DocVector out{seq.doc_id, {}, 0.0, false};
    if (weights.sum() > 0.0) {
        out.vector = weighted_mean(rows, weights);
    } else {
        out.vector = weighted_mean(rows, VectorXr::Ones(n));
        out.unweighted_fallback = true;
    }
    out.norm = out.vector.norm();
    return out;
}

}  // namespace docflow

#pragma once

#include <docflow/corpus.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace docflow {

/// Document frequencies over a cleaned corpus with smoothed idf:
/// idf(t) = ln((1 + num_docs) / (1 + df(t))) + 1.
class TfIdfModel {
public:
    /// Throws ContractViolation on an empty corpus.
    static TfIdfModel fit(std::span<const CleanDocument> corpus);

    std::size_t num_docs() const { return num_docs_; }
    std::size_t vocabulary_size() const { return terms_.size(); }
    const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }

    /// 0 for terms never seen while fitting.
    std::size_t document_frequency(const std::string& term) const;
    double idf(const std::string& term) const;

    /// Raw count of `term` in `doc` times idf(term).
    double weight(const std::string& term, const CleanDocument& doc) const;

    /// weight() for every word position of `doc`, counting each term once.
    std::vector<double> word_weights(const CleanDocument& doc) const;

private:
    double idf_from_df(std::size_t df) const;

    std::size_t num_docs_ = 0;
    std::map<std::string, std::size_t> vocabulary_;  // term -> index
    std::vector<std::string> terms_;
    std::vector<std::size_t> document_frequency_;
    std::vector<double> idf_;
};

inline TfIdfModel fit_tfidf(std::span<const CleanDocument> corpus) { return TfIdfModel::fit(corpus); }

inline double tfidf_weight(const TfIdfModel& model, const std::string& term, const CleanDocument& doc) {
    return model.weight(term, doc);
}

}  // namespace docflow

#include <docflow/tfidf.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace docflow {

TfIdfModel TfIdfModel::fit(std::span<const CleanDocument> corpus) {
    if (corpus.empty()) throw ContractViolation("cannot fit TF-IDF on an empty corpus");

    TfIdfModel model;
    model.num_docs_ = corpus.size();
    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus) {
        const std::set<std::string> terms(doc.words.begin(), doc.words.end());
        for (const auto& term : terms) ++df[term];
    }

    model.terms_.reserve(df.size());
    for (auto& [term, count] : df) {
        model.vocabulary_.emplace(term, model.terms_.size());
        model.terms_.push_back(term);
        model.document_frequency_.push_back(count);
        model.idf_.push_back(model.idf_from_df(count));
    }
    return model;
}

double TfIdfModel::idf_from_df(std::size_t df) const {
    return std::log((1.0 + static_cast<double>(num_docs_)) / (1.0 + static_cast<double>(df))) + 1.0;
}

std::size_t TfIdfModel::document_frequency(const std::string& term) const {
    const auto it = vocabulary_.find(term);
    return it == vocabulary_.end() ? 0 : document_frequency_[it->second];
}

double TfIdfModel::idf(const std::string& term) const {
    const auto it = vocabulary_.find(term);
    return it == vocabulary_.end() ? idf_from_df(0) : idf_[it->second];
}

double TfIdfModel::weight(const std::string& term, const CleanDocument& doc) const {
    const auto count = std::count(doc.words.begin(), doc.words.end(), term);
    return count == 0 ? 0.0 : static_cast<double>(count) * idf(term);
}

std::vector<double> TfIdfModel::word_weights(const CleanDocument& doc) const {
    std::unordered_map<std::string_view, std::size_t> counts;
    for (const auto& w : doc.words) ++counts[w];

    std::unordered_map<std::string_view, double> by_term;
    for (const auto& [term, count] : counts) by_term.emplace(term, static_cast<double>(count) * idf(std::string(term)));

    std::vector<double> weights;
    weights.reserve(doc.words.size());
    for (const auto& w : doc.words) weights.push_back(by_term.at(w));
    return weights;
}

}  // namespace docflow

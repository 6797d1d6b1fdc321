#pragma once

#include <docflow/corpus.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace docflow {

/// Planted-topic corpus for end-to-end checks: each document draws most of
/// its words from its topic's vocabulary and the rest from a shared one.
struct SyntheticOptions {
    std::size_t documents = 200;
    std::size_t topics = 5;
    std::size_t topic_vocabulary = 15;
    std::size_t shared_vocabulary = 100;
    std::size_t min_words = 300;
    std::size_t max_words = 1200;
    double topic_share = 0.85;
    std::uint64_t seed = 1;
};

struct SyntheticCorpus {
    CorpusStore documents;
    std::vector<std::size_t> topics;  // planted topic per document
};

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options);

}  // namespace docflow

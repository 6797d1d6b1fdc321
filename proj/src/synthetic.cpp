#include <docflow/synthetic.hpp>

#include <array>
#include <cstdio>
#include <random>
#include <string>

namespace docflow {

namespace {

constexpr std::array<const char*, 16> kSyllables = {"ba", "ce", "di", "fo", "gu", "la", "me", "ni",
                                                    "po", "ru", "sa", "te", "vi", "xo", "zu", "ção"};

std::string syllables(std::size_t value, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        out += kSyllables[value % kSyllables.size()];
        value /= kSyllables.size();
    }
    return out;
}

// Topic words start with a "q" + topic syllable pair and have 3-5 syllables so
// that some exceed one stub word piece; shared words are two syllables long.
std::string topic_word(std::size_t topic, std::size_t index) {
    return "q" + syllables(topic, 2) + syllables(index, 1 + index % 3);
}

std::string shared_word(std::size_t index) { return syllables(index, 2); }

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& o) {
    if (o.topics == 0 || o.topic_vocabulary == 0 || o.shared_vocabulary == 0 || o.min_words == 0 ||
        o.max_words < o.min_words)
        throw ContractViolation("invalid synthetic corpus options");

    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<std::size_t> length(o.min_words, o.max_words);
    std::uniform_int_distribution<std::size_t> topic_pick(0, o.topic_vocabulary - 1);
    std::uniform_int_distribution<std::size_t> shared_pick(0, o.shared_vocabulary - 1);
    std::bernoulli_distribution from_topic(o.topic_share);
    std::uniform_int_distribution<int> sentence(8, 16);

    SyntheticCorpus out;
    for (std::size_t d = 0; d < o.documents; ++d) {
        const std::size_t topic = d % o.topics;
        const std::size_t words = length(rng);
        std::string text = "<p>";
        int until_period = sentence(rng);
        for (std::size_t w = 0; w < words; ++w) {
            if (w > 0) text += ' ';
            text += from_topic(rng) ? topic_word(topic, topic_pick(rng)) : shared_word(shared_pick(rng));
            if (--until_period == 0) {
                text += '.';
                until_period = sentence(rng);
            }
        }
        text += "</p>";
        char id[32];
        std::snprintf(id, sizeof id, "doc-%05zu", d);
        out.documents.push_back({id, std::move(text)});
        out.topics.push_back(topic);
    }
    return out;
}

}  // namespace docflow

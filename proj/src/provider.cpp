#include <docflow/provider.hpp>

#include <nlohmann/json.hpp>
#include <unicode/unistr.h>

#include <fstream>
#include <random>
#include <thread>

namespace docflow {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// splitmix64 stream; uniform doubles in [-1, 1)
struct NoiseStream {
    std::uint64_t state;
    double next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1p-52 - 1.0;
    }
};

}  // namespace

StubProvider::StubProvider(Options options) : options_(std::move(options)) {
    if (options_.dimension == 0) throw ContractViolation("stub provider dimension must be positive");
}

const VectorXr& StubProvider::token_vector(TokenId token) {
    auto it = cache_.find(token);
    if (it != cache_.end()) return it->second;
    std::mt19937_64 rng(mix(options_.seed, static_cast<std::uint64_t>(token)));
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(options_.dimension)));
    VectorXr v(static_cast<Eigen::Index>(options_.dimension));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    return cache_.emplace(token, std::move(v)).first->second;
}

std::vector<WindowEmbeddings<float>> StubProvider::embed(const TokenizedDocument& doc, std::span<const Window> windows) {
    if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);

    const auto dim = static_cast<Eigen::Index>(options_.dimension);
    // uniform noise with standard deviation context_noise / sqrt(dim); cheaper than Gaussian draws
    const double noise_scale = options_.context_noise * std::sqrt(3.0 / static_cast<double>(options_.dimension));
    std::vector<WindowEmbeddings<float>> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        if (w.end > doc.tokens.size() || w.start >= w.end)
            throw DataError("document " + doc.doc_id + ": window out of range for the stub provider");
        NoiseStream noise{mix(mix(options_.seed, fnv1a(doc.doc_id)), w.start)};
        MatrixXf32 m(static_cast<Eigen::Index>(w.size()), dim);
        for (std::size_t p = w.start; p < w.end; ++p) {
            const auto& base = token_vector(doc.tokens[p]);
            const auto r = static_cast<Eigen::Index>(p - w.start);
            for (Eigen::Index j = 0; j < dim; ++j) m(r, j) = static_cast<float>(base(j) + noise_scale * noise.next());
        }
        out.push_back({w, std::move(m)});
    }
    return out;
}

TokenizedDocument StubTokenizer::tokenize(const CleanDocument& doc) const {
    TokenizedDocument out;
    out.doc_id = doc.id;
    for (std::size_t w = 0; w < doc.words.size(); ++w) {
        const auto word = icu::UnicodeString::fromUTF8(doc.words[w]);
        const auto pieces = std::max<std::int32_t>(1, (word.countChar32() + static_cast<std::int32_t>(piece_length_) - 1) /
                                                          static_cast<std::int32_t>(piece_length_));
        std::int32_t offset = 0;
        for (std::int32_t p = 0; p < pieces; ++p) {
            const std::int32_t next = word.moveIndex32(offset, static_cast<std::int32_t>(piece_length_));
            std::string piece;
            word.tempSubStringBetween(offset, next).toUTF8String(piece);
            // continuation pieces hash differently from word-initial ones, like "##" pieces
            const auto h = fnv1a(piece, p == 0 ? 1469598103934665603ULL : 0x84222325cbf29ce4ULL);
            out.tokens.push_back(kFirstId + static_cast<TokenId>(h % static_cast<std::uint64_t>(kVocab)));
            out.alignment.push_back(static_cast<std::int32_t>(w));
            offset = next;
        }
    }
    return out;
}

std::string tokens_to_jsonl(std::span<const TokenizedDocument> docs) {
    std::string out;
    for (const auto& d : docs) {
        out += nlohmann::json{{"id", d.doc_id}, {"tokens", d.tokens}, {"alignment", d.alignment}}.dump();
        out += '\n';
    }
    return out;
}

std::vector<TokenizedDocument> read_tokens_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read tokenized corpus " + path.string());
    std::vector<TokenizedDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TokenizedDocument d{j.at("id").get<std::string>(), j.at("tokens").get<std::vector<TokenId>>(),
                                j.at("alignment").get<std::vector<std::int32_t>>()};
            d.validate();
            docs.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

}  // namespace docflow

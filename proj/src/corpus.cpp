#include <docflow/corpus.hpp>

#include <nlohmann/json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace docflow {

namespace fs = std::filesystem;
using json = nlohmann::json;

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "directory") return CorpusFormat::directory;
    throw ContractViolation("unknown corpus format '" + std::string(name) + "' (expected jsonl or directory)");
}

std::string_view to_string(CorpusFormat format) {
    return format == CorpusFormat::jsonl ? "jsonl" : "directory";
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

CorpusStore ingest_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus file " + path.string());

    CorpusStore store;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
        }
        if (!record.is_object()) throw DataError("line " + std::to_string(line_no) + ": record is not an object");
        for (const char* field : {"id", "text"}) {
            if (!record.contains(field))
                throw DataError("line " + std::to_string(line_no) + ": missing field \"" + field + "\"");
            if (!record[field].is_string())
                throw DataError("line " + std::to_string(line_no) + ": field \"" + field + "\" is not a string");
        }
        RawDocument doc{record["id"].get<std::string>(), record["text"].get<std::string>()};
        if (doc.id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty id");
        if (!seen.insert(doc.id).second) throw DataError("duplicate document id \"" + doc.id + "\"");
        store.push_back(std::move(doc));
    }
    return store;
}

CorpusStore ingest_directory(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) throw IoError("corpus directory not readable: " + path.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    CorpusStore store;
    std::set<std::string> seen;
    for (const auto& file : files) {
        RawDocument doc{file.stem().string(), read_file(file)};
        if (!seen.insert(doc.id).second) throw DataError("duplicate document id \"" + doc.id + "\"");
        store.push_back(std::move(doc));
    }
    return store;
}

// Tags become a single space so adjacent words stay separate; a handful of
// common entities are decoded.
icu::UnicodeString strip_markup(const icu::UnicodeString& in) {
    static const std::pair<const char16_t*, char16_t> entities[] = {
        {u"&amp;", u'&'}, {u"&lt;", u'<'}, {u"&gt;", u'>'}, {u"&quot;", u'"'}, {u"&apos;", u'\''}, {u"&nbsp;", u' '},
    };

    icu::UnicodeString out;
    const int32_t n = in.length();
    int32_t i = 0;
    while (i < n) {
        const char16_t c = in.charAt(i);
        if (c == u'<') {
            const int32_t close = in.indexOf(u'>', i + 1);
            if (close >= 0) {
                out.append(u' ');
                i = close + 1;
                continue;
            }
        } else if (c == u'&') {
            bool decoded = false;
            for (const auto& [name, value] : entities) {
                icu::UnicodeString entity(name);
                if (in.compare(i, entity.length(), entity) == 0) {
                    out.append(value);
                    i += entity.length();
                    decoded = true;
                    break;
                }
            }
            if (decoded) continue;
            if (i + 2 < n && in.charAt(i + 1) == u'#') {
                const int32_t semi = in.indexOf(u';', i + 2);
                if (semi > i + 2 && semi - i <= 10) {
                    std::string digits;
                    in.tempSubStringBetween(i + 2, semi).toUTF8String(digits);
                    const bool hex = !digits.empty() && (digits[0] == 'x' || digits[0] == 'X');
                    try {
                        const auto cp = static_cast<UChar32>(std::stoul(hex ? digits.substr(1) : digits, nullptr, hex ? 16 : 10));
                        if (cp > 0 && cp <= 0x10FFFF) {
                            out.append(cp);
                            i = semi + 1;
                            continue;
                        }
                    } catch (const std::exception&) {
                    }
                }
            }
        }
        out.append(c);
        ++i;
    }
    return out;
}

icu::UnicodeString collapse_whitespace(const icu::UnicodeString& in) {
    icu::UnicodeString out;
    bool pending_space = false;
    for (int32_t i = 0; i < in.length();) {
        const UChar32 c = in.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.isEmpty()) out.append(u' ');
        pending_space = false;
        out.append(c);
    }
    return out;
}

icu::UnicodeString trim_whitespace(const icu::UnicodeString& in) {
    int32_t begin = 0;
    int32_t end = in.length();
    while (begin < end) {
        const UChar32 c = in.char32At(begin);
        if (!u_isUWhiteSpace(c)) break;
        begin += U16_LENGTH(c);
    }
    while (end > begin) {
        const int32_t prev = in.moveIndex32(end, -1);
        if (!u_isUWhiteSpace(in.char32At(prev))) break;
        end = prev;
    }
    return icu::UnicodeString(in, begin, end - begin);
}

bool is_word_char(UChar32 c) { return u_isalpha(c) || u_isdigit(c); }

}  // namespace

CorpusStore ingest_corpus(const fs::path& path, CorpusFormat format) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw IoError("corpus path does not exist: " + path.string());
    return format == CorpusFormat::jsonl ? ingest_jsonl(path) : ingest_directory(path);
}

CleaningStep parse_cleaning_step(std::string_view name) {
    if (name == "strip_markup") return CleaningStep::strip_markup;
    if (name == "unicode_normalize") return CleaningStep::unicode_normalize;
    if (name == "lowercase") return CleaningStep::lowercase;
    if (name == "collapse_whitespace") return CleaningStep::collapse_whitespace;
    throw ContractViolation("unknown cleaning step '" + std::string(name) + "'");
}

std::string_view to_string(CleaningStep step) {
    switch (step) {
        case CleaningStep::strip_markup: return "strip_markup";
        case CleaningStep::unicode_normalize: return "unicode_normalize";
        case CleaningStep::lowercase: return "lowercase";
        case CleaningStep::collapse_whitespace: return "collapse_whitespace";
    }
    return "?";
}

void CleaningPolicy::validate() const {
    if (steps.empty()) throw ContractViolation("cleaning.steps must not be empty");
    std::set<CleaningStep> unique(steps.begin(), steps.end());
    if (unique.size() != steps.size()) throw ContractViolation("cleaning.steps must not repeat a step");
    if (min_length < 1) throw ContractViolation("cleaning.min_length must be >= 1");
}

CleanResult clean_text(const RawDocument& raw, const CleaningPolicy& policy) {
    policy.validate();

    icu::UnicodeString text = icu::UnicodeString::fromUTF8(raw.text);
    for (const auto step : policy.steps) {
        switch (step) {
            case CleaningStep::strip_markup:
                text = strip_markup(text);
                break;
            case CleaningStep::unicode_normalize: {
                UErrorCode status = U_ZERO_ERROR;
                const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
                if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
                text = nfc->normalize(text, status);
                if (U_FAILURE(status)) throw DataError("unicode normalization failed for document " + raw.id);
                break;
            }
            case CleaningStep::lowercase:
                text.toLower(icu::Locale::getRoot());
                break;
            case CleaningStep::collapse_whitespace:
                text = collapse_whitespace(text);
                break;
        }
    }
    text = trim_whitespace(text);

    CleanResult result;
    if (text.isEmpty()) {
        result.exclusion_reason = "empty after cleaning";
        return result;
    }
    const auto length = static_cast<std::size_t>(text.countChar32());
    if (length < policy.min_length) {
        result.exclusion_reason = "shorter than min_length (" + std::to_string(length) + " < " +
                                  std::to_string(policy.min_length) + ")";
        return result;
    }

    CleanDocument doc;
    doc.id = raw.id;
    text.toUTF8String(doc.text);
    doc.words = word_tokenize(doc.text);
    result.document = std::move(doc);
    return result;
}

std::vector<std::string> word_tokenize(std::string_view text) {
    const icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    std::vector<std::string> words;
    int32_t start = -1;
    int32_t i = 0;
    const auto flush = [&](int32_t end) {
        if (start < 0) return;
        std::string word;
        u.tempSubStringBetween(start, end).toUTF8String(word);
        words.push_back(std::move(word));
        start = -1;
    };
    while (i < u.length()) {
        const UChar32 c = u.char32At(i);
        if (is_word_char(c)) {
            if (start < 0) start = i;
        } else {
            flush(i);
        }
        i += U16_LENGTH(c);
    }
    flush(u.length());
    return words;
}

std::size_t utf8_length(std::string_view text) {
    std::size_t count = 0;
    for (const unsigned char c : text) count += (c & 0xC0) != 0x80;
    return count;
}

CleanedCorpus clean_corpus(const CorpusStore& corpus, const CleaningPolicy& policy) {
    CleanedCorpus out;
    for (const auto& raw : corpus) {
        auto result = clean_text(raw, policy);
        if (result.excluded()) {
            out.exclusions.emplace(raw.id, std::move(result.exclusion_reason));
        } else {
            out.documents.push_back(std::move(*result.document));
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<CleanDocument>& documents) {
    std::string out;
    for (const auto& doc : documents) {
        out += json{{"id", doc.id}, {"text", doc.text}}.dump();
        out += '\n';
    }
    return out;
}

std::string exclusions_to_json(const std::map<std::string, std::string>& exclusions) {
    json out = json::object();
    for (const auto& [id, reason] : exclusions) out[id] = reason;
    return out.dump(2) + "\n";
}

std::vector<CleanDocument> read_clean_corpus(const fs::path& path) {
    std::vector<CleanDocument> docs;
    for (auto& raw : ingest_corpus(path, CorpusFormat::jsonl)) {
        CleanDocument doc{std::move(raw.id), std::move(raw.text), {}};
        doc.words = word_tokenize(doc.text);
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace docflow

#include <docflow/corpus.hpp>

#include "../support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

using namespace docflow;
using testing::TempDir;
using testing::write_file;

namespace {

CleaningPolicy only(std::vector<CleaningStep> steps, std::size_t min_length = 1) {
    CleaningPolicy p;
    p.steps = std::move(steps);
    p.min_length = min_length;
    return p;
}

std::string error_of(const auto& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("jsonl ingest keeps ids and order") {
    TempDir dir("corpus");
    write_file(dir / "c.jsonl", R"({"id": "b", "text": "second"})"
                                "\n"
                                R"({"id": "a", "text": "first"})"
                                "\n");
    const auto store = ingest_corpus(dir / "c.jsonl", CorpusFormat::jsonl);
    REQUIRE(store.size() == 2);
    CHECK(store[0].id == "b");
    CHECK(store[1].id == "a");
    CHECK(store[1].text == "first");
}

TEST_CASE("duplicate ids are rejected by name") {
    TempDir dir("corpus");
    write_file(dir / "c.jsonl", "{\"id\": \"A\", \"text\": \"x\"}\n{\"id\": \"A\", \"text\": \"y\"}\n");
    CHECK_THROWS_AS(ingest_corpus(dir / "c.jsonl", CorpusFormat::jsonl), DataError);
    const auto msg = error_of([&] { ingest_corpus(dir / "c.jsonl", CorpusFormat::jsonl); });
    CHECK(msg.find("\"A\"") != std::string::npos);
}

TEST_CASE("missing text field cites the line") {
    TempDir dir("corpus");
    write_file(dir / "c.jsonl", "{\"id\": \"1\", \"text\": \"x\"}\n{\"id\": \"2\", \"text\": \"y\"}\n{\"id\": \"3\"}\n");
    const auto msg = error_of([&] { ingest_corpus(dir / "c.jsonl", CorpusFormat::jsonl); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("text") != std::string::npos);
}

TEST_CASE("blank lines are skipped, malformed json is a data error") {
    TempDir dir("corpus");
    write_file(dir / "ok.jsonl", "\n{\"id\": \"1\", \"text\": \"x\"}\n\n");
    CHECK(ingest_corpus(dir / "ok.jsonl", CorpusFormat::jsonl).size() == 1);
    write_file(dir / "bad.jsonl", "{\"id\": \"1\", \"text\": \n");
    CHECK_THROWS_AS(ingest_corpus(dir / "bad.jsonl", CorpusFormat::jsonl), DataError);
}

TEST_CASE("missing paths are i/o errors") {
    CHECK_THROWS_AS(ingest_corpus("/nonexistent/corpus.jsonl", CorpusFormat::jsonl), IoError);
    CHECK_THROWS_AS(ingest_corpus("/nonexistent/dir", CorpusFormat::directory), IoError);
}

TEST_CASE("directory ingest uses stems in lexicographic order") {
    TempDir dir("corpus");
    write_file(dir / "b.txt", "bee");
    write_file(dir / "a.txt", "ay");
    write_file(dir / "notes.md", "ignored");
    const auto store = ingest_corpus(dir.path(), CorpusFormat::directory);
    REQUIRE(store.size() == 2);
    CHECK(store[0].id == "a");
    CHECK(store[0].text == "ay");
    CHECK(store[1].id == "b");
}

TEST_CASE("clean_text examples") {
    auto r = clean_text({"x", "  Foo\tBAR "}, only({CleaningStep::lowercase, CleaningStep::collapse_whitespace}));
    REQUIRE_FALSE(r.excluded());
    CHECK(r.document->text == "foo bar");

    r = clean_text({"x", "<p>Olá</p>"}, only({CleaningStep::strip_markup, CleaningStep::lowercase}));
    REQUIRE_FALSE(r.excluded());
    CHECK(r.document->text == "olá");

    r = clean_text({"x", "<br/>"}, only({CleaningStep::strip_markup}));
    CHECK(r.excluded());
    CHECK_FALSE(r.exclusion_reason.empty());
}

TEST_CASE("unicode normalization composes and uppercase accents lowercase") {
    // "a" + combining acute
    auto r = clean_text({"x", "Ac\xcc\xa7\xc3\x83O"}, only({CleaningStep::unicode_normalize, CleaningStep::lowercase}));
    REQUIRE_FALSE(r.excluded());
    CHECK(r.document->text == "ação");
    CHECK(utf8_length(r.document->text) == 4);
}

TEST_CASE("entities are decoded after markup is removed") {
    auto r = clean_text({"x", "a&amp;b &lt;tag&gt;"}, only({CleaningStep::strip_markup}));
    REQUIRE_FALSE(r.excluded());
    CHECK(r.document->text == "a&b <tag>");
}

TEST_CASE("short documents are excluded with a reason") {
    const auto r = clean_text({"x", "short text"}, CleaningPolicy{});
    CHECK(r.excluded());
    CHECK(r.exclusion_reason.find("50") != std::string::npos);
}

TEST_CASE("policy validation") {
    CHECK_NOTHROW(CleaningPolicy{}.validate());
    CHECK_THROWS_AS(only({}).validate(), ContractViolation);
    CHECK_THROWS_AS(only({CleaningStep::lowercase, CleaningStep::lowercase}).validate(), ContractViolation);
    CHECK_THROWS_AS(only({CleaningStep::lowercase}, 0).validate(), ContractViolation);
    CHECK_THROWS_AS(parse_cleaning_step("stemming"), ContractViolation);
}

TEST_CASE("word_tokenize examples") {
    CHECK(word_tokenize("ação trabalhista, recurso.") == std::vector<std::string>{"ação", "trabalhista", "recurso"});
    CHECK(word_tokenize("").empty());
    CHECK(word_tokenize("a1 b-2") == std::vector<std::string>{"a1", "b", "2"});
}

TEST_CASE("clean_corpus splits kept and excluded documents") {
    CorpusStore store{{"long", std::string(60, 'a')}, {"tiny", "abc"}};
    const auto cleaned = clean_corpus(store, CleaningPolicy{});
    REQUIRE(cleaned.documents.size() == 1);
    CHECK(cleaned.documents[0].id == "long");
    CHECK(cleaned.exclusions.count("tiny") == 1);
    const auto report = nlohmann::json::parse(exclusions_to_json(cleaned.exclusions));
    CHECK(report.contains("tiny"));
}

TEST_CASE("cleaned corpus round-trips through jsonl") {
    TempDir dir("corpus");
    std::vector<CleanDocument> docs{{"d1", "olá mundo", {}}, {"d2", "recurso \"ordinário\"", {}}};
    write_file(dir / "clean.jsonl", to_jsonl(docs));
    const auto back = read_clean_corpus(dir / "clean.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[1].text == docs[1].text);
    CHECK(back[0].words == std::vector<std::string>{"olá", "mundo"});
}

#include <docflow/config.hpp>

#include "../support.hpp"

#include <doctest.h>
#include <yaml-cpp/yaml.h>

using namespace docflow;

namespace {

// Config directory with the files that the configs below refer to.
struct Base {
    testing::TempDir dir{"cfg"};
    std::filesystem::path path = dir.path();
    Base() {
        for (const auto* name : {"docs.jsonl", "c", "t.jsonl", "e.dfe"}) testing::write_file(dir / name, "");
    }
};

const std::filesystem::path& base() {
    static Base b;
    return b.path;
}

std::string error_of(const std::string& yaml) {
    try {
        parse_config(yaml, base());
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal config takes every default") {
    const auto c = parse_config("corpus:\n  path: docs.jsonl\n", base());
    CHECK(c.corpus_path == base() / "docs.jsonl");
    CHECK(c.training.slot.length == 128);
    CHECK(c.training.slot.return_tokens == 32);
    CHECK(c.inference.length == 510);
    CHECK(c.inference.return_tokens == 64);
    CHECK(c.mask.rate == 0.15);
    CHECK(c.k_set == default_k_candidates());
    CHECK(c.kmeans.k == 0);
    CHECK(c.kmeans.restarts == 5);
    CHECK(c.projection.perplexity == 30.0);
    CHECK(c.workspace == base() / "workspace");
}

TEST_CASE("echo shows the defaults and parses back") {
    const auto c = parse_config("corpus:\n  path: docs.jsonl\n", base());
    const auto yaml = config_to_yaml(c);
    const auto node = YAML::Load(yaml);
    CHECK(node["training"]["slot_length"].as<int>() == 128);
    CHECK(node["training"]["return_tokens"].as<int>() == 32);
    CHECK(node["inference"]["slot_length"].as<int>() == 510);
    CHECK(node["inference"]["return_tokens"].as<int>() == 64);
    CHECK(node["mask"]["rate"].as<std::string>() == "0.15");
    CHECK(node["k_set"].size() == 31);
    CHECK(node["k_set"][0].as<int>() == 2);
    CHECK(node["k_set"][30].as<int>() == 32);

    const auto back = parse_config(yaml, base());
    CHECK(back.training.slot.length == c.training.slot.length);
    CHECK(back.k_set == c.k_set);
    CHECK(config_to_yaml(back) == yaml);
}

TEST_CASE("overrides") {
    const auto c = parse_config("corpus: {path: " + (base() / "c").string() + R"(, format: directory}
workspace: ws
training: {slot_length: 64, return_tokens: 16, mode: fixed, objective: clm, separator_token: 3}
kmeans: {k: 7, seed: 9}
k_set: [2, 4, 8]
provider: {kind: files, tokens_path: t.jsonl, embeddings_path: e.dfe}
)",
                                base());
    CHECK(c.corpus_path == base() / "c");
    CHECK(c.corpus_format == CorpusFormat::directory);
    CHECK(c.workspace == base() / "ws");
    CHECK(c.training.mode == TrainingSlotMode::fixed);
    CHECK(c.training.objective == TrainingObjective::clm);
    CHECK(c.training.separator_token == 3);
    CHECK(c.kmeans.k == 7);
    CHECK(c.k_set == std::vector<std::size_t>{2, 4, 8});
    CHECK(c.provider.kind == ProviderKind::files);
    CHECK(c.provider.embeddings_path == base() / "e.dfe");
}

TEST_CASE("return tokens must be below the slot length") {
    const auto msg = error_of("corpus: {path: c}\ntraining: {slot_length: 128, return_tokens: 128}\n");
    CHECK(msg.find("SlotSpec") != std::string::npos);
    CHECK(msg.find("training") != std::string::npos);
    CHECK(error_of("corpus: {path: c}\ninference: {slot_length: 64, return_tokens: 70}\n").find("inference") !=
          std::string::npos);
}

TEST_CASE("unknown keys are named") {
    CHECK(error_of("corpus: {path: c}\nslotz: 3\n").find("slotz") != std::string::npos);
    CHECK(error_of("corpus: {path: c}\nkmeans: {kk: 3}\n").find("kk") != std::string::npos);
}

TEST_CASE("invalid values") {
    CHECK_FALSE(error_of("workspace: w\n").empty());  // no corpus path
    CHECK(error_of("corpus: {path: c}\nmask: {rate: 2}\n").find("mask") != std::string::npos);
    CHECK_FALSE(error_of("corpus: {path: c}\nk_set: [2, 3]\n").empty());
    CHECK_FALSE(error_of("corpus: {path: c}\nk_set: [4, 3, 5]\n").empty());
    CHECK_FALSE(error_of("corpus: {path: c}\ntraining: {mode: sliding}\n").empty());
    CHECK_FALSE(error_of("corpus: {path: c}\nkmeans: {tolerance: abc}\n").empty());
    CHECK_FALSE(error_of("corpus: [unclosed\n").empty());
    CHECK_FALSE(error_of("corpus: {path: c}\nprovider: {kind: files}\n").empty());
    CHECK(error_of("corpus: {path: missing.jsonl}\n").find("missing.jsonl") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

#include <docflow/vectorizer.hpp>

#include "../support.hpp"

#include <doctest.h>

#include <cmath>

using namespace docflow;

namespace {

CleanDocument doc(std::string id, std::string text) {
    auto words = word_tokenize(text);
    return {std::move(id), std::move(text), std::move(words)};
}

Window win(std::size_t start, std::size_t end) { return {"d", start, end, WindowKind::intermediate}; }

}  // namespace

TEST_CASE("tf-idf on the two-document corpus") {
    const std::vector<CleanDocument> corpus{doc("d1", "a b a"), doc("d2", "b c")};
    const auto model = fit_tfidf(corpus);
    CHECK(model.num_docs() == 2);
    CHECK(model.document_frequency("a") == 1);
    CHECK(model.document_frequency("b") == 2);
    CHECK(model.document_frequency("c") == 1);
    CHECK(model.idf("b") == doctest::Approx(1.0));
    CHECK(model.idf("a") == doctest::Approx(1.4055).epsilon(1e-4));
    CHECK(model.idf("a") == std::log(3.0 / 2.0) + 1.0);
    CHECK(model.idf("zzz") == doctest::Approx(2.0986).epsilon(1e-4));
    CHECK(model.document_frequency("zzz") == 0);

    CHECK(tfidf_weight(model, "a", corpus[0]) == doctest::Approx(2.8110).epsilon(1e-4));
    CHECK(tfidf_weight(model, "c", corpus[0]) == 0.0);

    const auto w = model.word_weights(corpus[0]);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == w[2]);
    CHECK(w[1] == doctest::Approx(1.0));
}

TEST_CASE("single-document corpus has unit idf") {
    const std::vector<CleanDocument> corpus{doc("only", "x y y z")};
    const auto model = fit_tfidf(corpus);
    for (const auto& t : {"x", "y", "z"}) CHECK(model.idf(t) == 1.0);
    CHECK(tfidf_weight(model, "y", corpus[0]) == 2.0);
    CHECK_THROWS_AS(fit_tfidf(std::vector<CleanDocument>{}), ContractViolation);
}

TEST_CASE("merge assignment on the three-window example") {
    const std::vector<Window> ws{win(0, 510), win(446, 956), win(590, 1100)};
    CHECK(merge_boundaries(ws, 1100) == std::vector<std::size_t>{0, 478, 773});
    const auto a = merge_assignment(ws, 1100);
    REQUIRE(a.size() == 1100);
    CHECK(a[445] == 0);
    CHECK(a[446] == 0);
    CHECK(a[477] == 0);
    CHECK(a[478] == 1);
    CHECK(a[509] == 1);
    CHECK(a[590] == 1);
    CHECK(a[772] == 1);
    CHECK(a[773] == 2);
    CHECK(a[1099] == 2);
}

TEST_CASE("merge with a four-token overlap") {
    const std::vector<Window> ws{win(0, 12), win(8, 20)};
    const auto a = merge_assignment(ws, 20);
    CHECK(a[8] == 0);
    CHECK(a[9] == 0);
    CHECK(a[10] == 1);
    CHECK(a[11] == 1);
}

TEST_CASE("odd overlaps give the extra position to the earlier window") {
    const std::vector<Window> ws{win(0, 10), win(7, 17)};  // overlap 7,8,9
    const auto a = merge_assignment(ws, 17);
    CHECK(a[7] == 0);
    CHECK(a[8] == 0);
    CHECK(a[9] == 1);
}

TEST_CASE("merge rejects gaps and bad coverage") {
    const std::vector<Window> gap{win(0, 10), win(12, 20)};
    try {
        merge_assignment(gap, 20);
        FAIL("expected a gap error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("[10,12)") != std::string::npos);
    }
    CHECK_THROWS_AS(merge_assignment(std::vector<Window>{win(2, 10)}, 10), DataError);
    CHECK_THROWS_AS(merge_assignment(std::vector<Window>{win(0, 9)}, 10), DataError);
    CHECK_THROWS_AS(merge_assignment(std::vector<Window>{}, 10), DataError);
}

TEST_CASE("merging a single window returns its matrix") {
    std::mt19937_64 rng(1);
    const MatrixXf32 m = testing::gaussian_matrix(7, 3, rng).cast<float>();
    const std::vector<WindowEmbeddings<float>> ws{{win(0, 7), m}};
    const auto seq = merge_window_embeddings<float>(ws, 7);
    CHECK(seq.matrix == m);
}

TEST_CASE("merged rows come from the assigned window") {
    std::vector<WindowEmbeddings<double>> ws;
    for (const auto& w : {win(0, 12), win(8, 20)}) {
        MatrixXr m(static_cast<Eigen::Index>(w.size()), 2);
        for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) << static_cast<double>(w.start), static_cast<double>(i);
        ws.push_back({w, m});
    }
    const auto seq = merge_window_embeddings<double>(ws, 20);
    CHECK(seq.matrix(9, 0) == 0.0);
    CHECK(seq.matrix(9, 1) == 9.0);
    CHECK(seq.matrix(10, 0) == 8.0);
    CHECK(seq.matrix(10, 1) == 2.0);

    ws[1].matrix.conservativeResize(11, 2);
    CHECK_THROWS_AS(merge_window_embeddings<double>(ws, 20), DataError);
}

TEST_CASE("weighted mean examples") {
    MatrixXr rows(2, 2);
    rows << 1, 0, 0, 1;
    const VectorXr m = weighted_mean(rows, VectorXr((VectorXr(2) << 1, 3).finished()));
    CHECK(m(0) == doctest::Approx(0.25));
    CHECK(m(1) == doctest::Approx(0.75));

    MatrixXr three(3, 2);
    three << 1, 1, 5, 5, 9, 9;
    const VectorXr eq = weighted_mean(three, VectorXr::Constant(3, 2.5));
    CHECK(eq(0) == doctest::Approx(5.0));
    const VectorXr first = weighted_mean(three, VectorXr((VectorXr(3) << 2, 0, 0).finished()));
    CHECK(first(0) == 1.0);
    CHECK(first(1) == 1.0);
    CHECK_THROWS_AS(weighted_mean(three, VectorXr::Zero(3)), ContractViolation);
}

TEST_CASE("pooling uses word weights and skips special rows") {
    const std::vector<CleanDocument> corpus{doc("d1", "a b a"), doc("d2", "b c")};
    const auto model = fit_tfidf(corpus);

    // [CLS] a b a [SEP]
    TokenEmbeddingSeq<float> seq{"d1", MatrixXf32(5, 2), {-1, 0, 1, 2, -1}};
    seq.matrix << 100, 100, 1, 0, 0, 1, 1, 0, -100, -100;
    const auto v = pool_document(seq, corpus[0], model);
    const double wa = 2.0 * model.idf("a"), wb = model.idf("b");
    CHECK(v.vector(0) == doctest::Approx(2.0 * wa / (2.0 * wa + wb)));
    CHECK(v.vector(1) == doctest::Approx(wb / (2.0 * wa + wb)));
    CHECK(v.norm == doctest::Approx(v.vector.norm()));
    CHECK_FALSE(v.unweighted_fallback);
}

TEST_CASE("words unseen by the model still carry weight") {
    const std::vector<CleanDocument> fitted{doc("d1", "a")};
    const auto model = fit_tfidf(fitted);
    const auto other = doc("d2", "q r");
    TokenEmbeddingSeq<double> seq{"d2", MatrixXr(2, 2), {0, 1}};
    seq.matrix << 1, 3, 3, 5;
    const auto v = pool_document(seq, other, model);
    CHECK_FALSE(v.unweighted_fallback);
    CHECK(v.vector(0) == doctest::Approx(2.0));

    TokenEmbeddingSeq<double> specials{"d2", MatrixXr(2, 2), {-1, -1}};
    specials.matrix.setOnes();
    CHECK_THROWS_AS(pool_document(specials, other, model), DataError);
}

TEST_CASE("pooling rejects malformed input") {
    const std::vector<CleanDocument> corpus{doc("d1", "a b")};
    const auto model = fit_tfidf(corpus);
    TokenEmbeddingSeq<double> seq{"d1", MatrixXr::Ones(2, 2), {0, 5}};
    CHECK_THROWS_AS(pool_document(seq, corpus[0], model), DataError);
    seq.alignment = {0};
    CHECK_THROWS_AS(pool_document(seq, corpus[0], model), DataError);
    seq.alignment = {0, 1};
    seq.matrix(1, 1) = std::nan("");
    CHECK_THROWS_AS(pool_document(seq, corpus[0], model), DataError);
}

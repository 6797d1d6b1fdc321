#include <docflow/kmeans.hpp>

#include "../support.hpp"

#include <doctest.h>

#include <map>

using namespace docflow;

namespace {

KMeansConfig raw(std::size_t k, std::uint64_t seed = 0) {
    KMeansConfig c;
    c.k = k;
    c.seed = seed;
    c.normalize_inputs = false;
    return c;
}

void check_monotone(const std::vector<double>& history) {
    for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1] + 1e-9);
}

// Same partition up to relabeling.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<std::size_t, std::size_t> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
        if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("two well separated pairs") {
    MatrixXr x(4, 1);
    x << 0, 0.1, 10, 10.1;
    const auto model = kmeans_fit(x, raw(2));
    std::vector<double> c{model.centroids(0, 0), model.centroids(1, 0)};
    std::sort(c.begin(), c.end());
    CHECK(c[0] == doctest::Approx(0.05));
    CHECK(c[1] == doctest::Approx(10.05));
    CHECK(model.inertia == doctest::Approx(0.01));
    CHECK(inertia(model, x) == doctest::Approx(0.01));
    CHECK(model.assignments[0] == model.assignments[1]);
    CHECK(model.assignments[2] == model.assignments[3]);
    CHECK(model.assignments[0] != model.assignments[2]);
    check_monotone(model.inertia_history);
}

TEST_CASE("identical points with k = 1") {
    const MatrixXr x = MatrixXr::Constant(6, 3, 2.0);
    const auto model = kmeans_fit(x, raw(1));
    CHECK(model.inertia == 0.0);
    CHECK(model.iterations_run == 1);
}

TEST_CASE("inertia is zero when every point is its centroid") {
    MatrixXr x(3, 2);
    x << 0, 1, 5, 5, -3, 2;
    const auto model = kmeans_fit(x, raw(3));
    CHECK(model.inertia == 0.0);
}

TEST_CASE("inertia matches a double-loop recomputation") {
    std::mt19937_64 rng(5);
    const MatrixXr x = testing::gaussian_matrix(50, 6, rng);
    const auto model = kmeans_fit(x, raw(4, 9));
    double naive = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double d = x(i, j) - model.centroids(Eigen::Index(model.assignments[std::size_t(i)]), j);
            naive += d * d;
        }
    CHECK(inertia(model, x) == doctest::Approx(naive).epsilon(1e-12));
    CHECK(std::abs(model.inertia - naive) < 1e-9);
}

TEST_CASE("seeded runs are deterministic and restarts can only help") {
    std::mt19937_64 rng(11);
    const MatrixXr x = testing::gaussian_matrix(120, 5, rng);
    auto c = raw(6, 123);
    const auto a = kmeans_fit(x, c);
    const auto b = kmeans_fit(x, c);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    c.restarts = 1;
    CHECK(kmeans_fit(x, c).inertia >= a.inertia);
}

TEST_CASE("permuting rows permutes the partition") {
    std::mt19937_64 rng(2);
    MatrixXr x(60, 3);
    for (Eigen::Index i = 0; i < 60; ++i) x.row(i) = testing::gaussian_matrix(1, 3, rng) * 0.1 + MatrixXr::Constant(1, 3, double(i % 3) * 5);
    const auto base = kmeans_fit(x, raw(3));
    std::vector<Eigen::Index> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const MatrixXr y = x(perm, Eigen::all);
    const auto shuffled = kmeans_fit(y, raw(3, 77));
    std::vector<std::size_t> expected(60);
    for (std::size_t i = 0; i < 60; ++i) expected[i] = base.assignments[std::size_t(perm[i])];
    CHECK(same_partition(expected, shuffled.assignments));
}

TEST_CASE("normalized inputs assign by maximum cosine") {
    std::mt19937_64 rng(8);
    const MatrixXr x = testing::gaussian_matrix(80, 7, rng);
    KMeansConfig c;
    c.k = 5;
    const auto model = kmeans_fit(x, c);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index best = 0;
        double best_cos = -2.0;
        for (Eigen::Index k = 0; k < model.centroids.rows(); ++k) {
            const double cs = x.row(i).dot(model.centroids.row(k)) / (x.row(i).norm() * model.centroids.row(k).norm());
            if (cs > best_cos) {
                best_cos = cs;
                best = k;
            }
        }
        CHECK(model.assignments[std::size_t(i)] == std::size_t(best));
    }
}

TEST_CASE("contract and data errors") {
    MatrixXr x = MatrixXr::Ones(3, 2);
    CHECK_THROWS_AS(kmeans_fit(x, raw(4)), ContractViolation);
    CHECK_THROWS_AS(kmeans_fit(x, raw(0)), ContractViolation);
    x.row(1).setZero();
    KMeansConfig c;
    c.k = 2;
    const std::vector<std::string> ids{"a", "zero-doc", "c"};
    try {
        kmeans_fit(x, c, ids);
        FAIL("expected a zero-norm error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("zero-doc") != std::string::npos);
    }
}

TEST_CASE("empty clusters are repaired") {
    // duplicated points force k-means++ to fall back to uniform picks
    MatrixXr x(5, 1);
    x << 0, 0, 0, 0, 1;
    const auto model = kmeans_fit(x, raw(3));
    std::vector<int> sizes(3, 0);
    for (const auto a : model.assignments) ++sizes[a];
    for (const int s : sizes) CHECK(s > 0);
}

TEST_CASE("elbow example picks k = 3") {
    const auto r = elbow_from_curve({{1, 100}, {2, 50}, {3, 20}, {4, 18}, {5, 17}, {6, 16}});
    CHECK(r.chosen_k == 3);
    // chord from (0,1) to (1,0): distance below = -(x + y - 1) / sqrt(2)
    CHECK(r.knee_scores[2] == doctest::Approx(0.552 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(r.monotonicity_violations.empty());
}

TEST_CASE("linear decay ties to the smallest candidate") {
    const auto r = elbow_from_curve({{2, 50}, {3, 40}, {4, 30}, {5, 20}});
    CHECK(r.chosen_k == 2);
    for (const double s : r.knee_scores) CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("elbow flags increases in inertia") {
    const auto r = elbow_from_curve({{2, 50}, {3, 10}, {4, 12}, {5, 5}});
    CHECK(r.monotonicity_violations == std::vector<std::size_t>{4});
}

TEST_CASE("default candidates") {
    const auto ks = default_k_candidates();
    CHECK(ks.size() == 31);
    CHECK(ks.front() == 2);
    CHECK(ks.back() == 32);
}

TEST_CASE("elbow over blobs") {
    std::mt19937_64 rng(21);
    const int k = 4;
    MatrixXr x(200, 8);
    const MatrixXr centers = testing::gaussian_matrix(k, 8, rng, 10.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = centers.row(i % k) + testing::gaussian_matrix(1, 8, rng, 0.5);
    auto c = raw(2, 3);
    const std::vector<std::size_t> ks{2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto r = select_k_elbow(x, ks, c);
    CHECK(r.chosen_k == 4);
    CHECK(r.candidates.size() == ks.size());

    const std::vector<std::size_t> bad{2, 2, 3};
    CHECK_THROWS_AS(select_k_elbow(x, bad, c), ContractViolation);
    const std::vector<std::size_t> too_big{2, 3, 500};
    CHECK_THROWS_AS(select_k_elbow(x, too_big, c), ContractViolation);
}

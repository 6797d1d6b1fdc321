#include <docflow/tsne.hpp>

#include "../support.hpp"

#include <doctest.h>

using namespace docflow;

namespace {

MatrixXr two_blobs(std::uint64_t seed, Eigen::Index per_blob, Eigen::Index dim) {
    std::mt19937_64 rng(seed);
    MatrixXr x = testing::gaussian_matrix(2 * per_blob, dim, rng);
    x.bottomRows(per_blob).array() += 10.0;
    return x;
}

ProjectionConfig quick() {
    ProjectionConfig c;
    c.perplexity = 10;
    c.iterations = 500;
    return c;
}

}  // namespace

TEST_CASE("a single point maps to the origin") {
    const auto r = project_tsne(MatrixXr::Ones(1, 5), ProjectionConfig{});
    CHECK(r.embedding.rows() == 1);
    CHECK(r.embedding.isZero());
}

TEST_CASE("conditional affinities hit the target perplexity") {
    std::mt19937_64 rng(4);
    const MatrixXr x = testing::gaussian_matrix(40, 5, rng);
    const auto p = detail::conditional_affinities(detail::squared_distances(x), 12.0);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        CHECK(p.row(i).sum() == doctest::Approx(1.0));
        CHECK(p(i, i) == 0.0);
        double h = 0.0;
        for (Eigen::Index j = 0; j < p.cols(); ++j)
            if (p(i, j) > 0) h -= p(i, j) * std::log(p(i, j));
        CHECK(std::exp(h) == doctest::Approx(12.0).epsilon(1e-3));
    }
}

TEST_CASE("squared distances match a direct computation") {
    std::mt19937_64 rng(6);
    const MatrixXr x = testing::gaussian_matrix(7, 3, rng);
    const auto d = detail::squared_distances(x);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j) CHECK(d(i, j) == doctest::Approx((x.row(i) - x.row(j)).squaredNorm()));
}

TEST_CASE("symmetrized affinities form a distribution") {
    std::mt19937_64 rng(5);
    const MatrixXr x = testing::gaussian_matrix(15, 4, rng);
    MatrixXr p = detail::conditional_affinities(detail::squared_distances(x), 5.0);
    p = (p + p.transpose()).eval() / 30.0;
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the update direction is the gradient of the KL divergence") {
    // central differences of detail::kl_divergence against the closed form
    // 4 sum_j (p_ij - q_ij) (1 + |y_i - y_j|^2)^-1 (y_i - y_j)
    std::mt19937_64 rng(3);
    const int n = 12;
    const MatrixXr x = testing::gaussian_matrix(n, 4, rng);
    const MatrixXr y = testing::gaussian_matrix(n, 2, rng);
    MatrixXr p = detail::conditional_affinities(detail::squared_distances(x), 4.0);
    p = (p + p.transpose()).eval() / (2.0 * n);
    const MatrixXr num = detail::student_kernel(y);
    const double z = num.sum();
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < 2; ++d) {
            double closed = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) closed += 4.0 * (p(i, j) - num(i, j) / z) * num(i, j) * (y(i, d) - y(j, d));
            MatrixXr a = y, b = y;
            const double h = 1e-6;
            a(i, d) += h;
            b(i, d) -= h;
            const double numeric = (detail::kl_divergence(p, a) - detail::kl_divergence(p, b)) / (2 * h);
            CHECK(numeric == doctest::Approx(closed).epsilon(1e-5));
        }
}

TEST_CASE("two blobs stay apart and the objective decreases") {
    const MatrixXr x = two_blobs(1, 20, 10);
    const auto r = project_tsne(x, quick());
    CHECK(r.embedding.allFinite());
    CHECK(r.final_kl <= r.initial_kl);
    CHECK(std::abs(r.embedding.col(0).mean()) < 1e-9);
    // every point is closer to its own blob's mean than to the other one
    const Eigen::RowVector2d a = r.embedding.topRows(20).colwise().mean();
    const Eigen::RowVector2d b = r.embedding.bottomRows(20).colwise().mean();
    for (Eigen::Index i = 0; i < 40; ++i) {
        const double da = (r.embedding.row(i) - a).norm(), db = (r.embedding.row(i) - b).norm();
        CHECK((i < 20 ? da < db : db < da));
    }
}

TEST_CASE("same seed, same bits; other seed, other layout") {
    const MatrixXr x = two_blobs(2, 15, 6);
    auto c = quick();
    const auto r1 = project_tsne(x, c);
    const auto r2 = project_tsne(x, c);
    CHECK(r1.embedding == r2.embedding);
    CHECK(r1.final_kl == r2.final_kl);
    c.seed = 1;
    CHECK(project_tsne(x, c).embedding != r1.embedding);
}

TEST_CASE("configuration checks") {
    const MatrixXr x = two_blobs(3, 5, 3);
    auto c = quick();
    c.perplexity = 10;  // n = 10
    CHECK_THROWS_AS(project_tsne(x, c), ContractViolation);
    c = quick();
    c.iterations = 10;
    CHECK_THROWS_AS(project_tsne(x, c), ContractViolation);
    c = quick();
    c.learning_rate = 0;
    CHECK_THROWS_AS(project_tsne(x, c), ContractViolation);
}

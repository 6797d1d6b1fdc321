#pragma once

#include <docflow/types.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace docflow {

struct ProjectionConfig {
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    std::uint64_t seed = 0;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iterations = 250;  // also where momentum switches 0.5 -> 0.8

    void validate(std::size_t n) const {
        if (iterations < 50) throw ContractViolation("projection.iterations must be >= 50");
        if (!(learning_rate > 0.0)) throw ContractViolation("projection.learning_rate must be > 0");
        if (!(perplexity >= 1.0)) throw ContractViolation("projection.perplexity must be >= 1");
        if (n > 1 && !(perplexity < static_cast<double>(n)))
            throw ContractViolation("projection.perplexity (" + std::to_string(perplexity) +
                                    ") must be below the number of points (" + std::to_string(n) + ")");
    }
};

struct TsneResult {
    MatrixXr embedding;  // n x 2
    double initial_kl = 0.0;
    double final_kl = 0.0;
};

namespace detail {

inline MatrixXr squared_distances(const MatrixXr& x) {
    const VectorXr sq = x.rowwise().squaredNorm();
    MatrixXr d = (-2.0 * x * x.transpose()).colwise() + sq;
    d.rowwise() += sq.transpose();
    d = d.cwiseMax(0.0);
    d.diagonal().setZero();
    return d;
}

/// Row-conditional affinities whose entropy matches log(perplexity), found
/// by bisection on the Gaussian precision of each row.
inline MatrixXr conditional_affinities(const MatrixXr& dist, double perplexity) {
    const Eigen::Index n = dist.rows();
    const double target = std::log(perplexity);
    MatrixXr p = MatrixXr::Zero(n, n);
    VectorXr row(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) dmin = std::min(dmin, dist(i, j));

        double beta = 1.0;
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (int step = 0; step < 200; ++step) {
            double sum = 0.0, weighted = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) {
                    row(j) = 0.0;
                    continue;
                }
                const double shifted = dist(i, j) - dmin;
                row(j) = std::exp(-beta * shifted);
                sum += row(j);
                weighted += shifted * row(j);
            }
            const double entropy = std::log(sum) + beta * weighted / sum;
            row /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) break;
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        p.row(i) = row.transpose();
    }
    return p;
}

/// Student-t kernel 1 / (1 + |yi - yj|^2) with a zero diagonal.
inline MatrixXr student_kernel(const MatrixXr& y) {
    MatrixXr num = (1.0 + squared_distances(y).array()).inverse().matrix();
    num.diagonal().setZero();
    return num;
}

inline double kl_divergence(const MatrixXr& p, const MatrixXr& y) {
    const MatrixXr num = student_kernel(y);
    const double z = num.sum();
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double q = std::max(num(i, j) / z, 1e-12);
            kl += p(i, j) * std::log(p(i, j) / q);
        }
    return kl;
}

}  // namespace detail

/**
 * Exact t-SNE into two dimensions: perplexity-calibrated symmetric input
 * affinities, Student-t output affinities, gradient descent with momentum,
 * per-parameter gains and early exaggeration. Single-threaded and
 * deterministic given the seed. A single point maps to the origin.
 */
template <typename Derived>
TsneResult project_tsne(const Eigen::MatrixBase<Derived>& vectors, const ProjectionConfig& config) {
    const auto n = static_cast<std::size_t>(vectors.rows());
    config.validate(n);
    TsneResult result;
    if (n == 0) throw ContractViolation("t-SNE needs at least one point");
    if (n == 1) {
        result.embedding = MatrixXr::Zero(1, 2);
        return result;
    }
    const MatrixXr x = vectors.template cast<double>();
    if (!x.allFinite()) throw DataError("t-SNE input contains non-finite values");

    MatrixXr p = detail::conditional_affinities(detail::squared_distances(x), config.perplexity);
    p = (p + p.transpose()).eval() / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1e-4);
    MatrixXr y(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index j = 0; j < 2; ++j) y(i, j) = gauss(rng);

    result.initial_kl = detail::kl_divergence(p, y);

    MatrixXr velocity = MatrixXr::Zero(y.rows(), 2);
    MatrixXr gains = MatrixXr::Ones(y.rows(), 2);
    for (std::size_t it = 0; it < config.iterations; ++it) {
        const bool early = it < config.exaggeration_iterations;
        const double exaggeration = early ? config.early_exaggeration : 1.0;
        const double momentum = early ? 0.5 : 0.8;

        const MatrixXr num = detail::student_kernel(y);
        const double z = num.sum();
        const MatrixXr forces = ((exaggeration * p - num / z).array() * num.array()).matrix();
        const MatrixXr grad = 4.0 * (forces.rowwise().sum().asDiagonal() * y - forces * y);

        for (Eigen::Index i = 0; i < y.rows(); ++i)
            for (Eigen::Index j = 0; j < 2; ++j) {
                const bool same_sign = (grad(i, j) > 0) == (velocity(i, j) > 0);
                gains(i, j) = same_sign ? std::max(gains(i, j) * 0.8, 0.01) : gains(i, j) + 0.2;
            }
        velocity = momentum * velocity - config.learning_rate * gains.cwiseProduct(grad);
        y += velocity;
        y.rowwise() -= y.colwise().mean();
    }

    result.final_kl = detail::kl_divergence(p, y);
    result.embedding = std::move(y);
    return result;
}

}  // namespace docflow

#pragma once

#include <docflow/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace docflow {

struct KMeansConfig {
    std::size_t k = 8;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 300;
    double tolerance = 1e-4;  // max Euclidean centroid shift
    bool normalize_inputs = true;
    std::size_t restarts = 5;

    void validate() const {
        if (k < 1) throw ContractViolation("kmeans.k must be >= 1");
        if (max_iterations < 1) throw ContractViolation("kmeans.max_iterations must be >= 1");
        if (!(tolerance >= 0.0)) throw ContractViolation("kmeans.tolerance must be >= 0");
        if (restarts < 1) throw ContractViolation("kmeans.restarts must be >= 1");
    }
};

template <typename Scalar>
struct ClusterModel {
    RowMatrix<Scalar> centroids;           // k x D
    std::vector<std::size_t> assignments;  // per input row, in [0, k)
    Scalar inertia = 0;
    std::size_t iterations_run = 0;
    // inertia_history[0] is the seeded configuration, then one entry per
    // assign+update iteration.
    std::vector<Scalar> inertia_history;

    std::size_t k() const { return static_cast<std::size_t>(centroids.rows()); }
};

/**
 * Rows scaled to unit Euclidean norm. A zero or non-finite row is a
 * DataError naming the row (or its id when `ids` is given).
 */
template <typename Derived>
RowMatrix<typename Derived::Scalar> normalize_rows(const Eigen::MatrixBase<Derived>& vectors,
                                                   std::span<const std::string> ids = {}) {
    using Scalar = typename Derived::Scalar;
    RowMatrix<Scalar> out = vectors;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const Scalar norm = out.row(i).norm();
        if (!(norm > 0) || !std::isfinite(static_cast<double>(norm))) {
            const auto name = static_cast<std::size_t>(i) < ids.size() ? "document '" + ids[static_cast<std::size_t>(i)] + "'"
                                                                        : "row " + std::to_string(i);
            throw DataError(name + " has zero or non-finite norm and cannot be normalized");
        }
        out.row(i) /= norm;
    }
    return out;
}

namespace detail {

inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(restart), 0x6b6du};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (std::uint64_t{out[0]} << 32) | out[1];
}

template <typename Scalar>
Scalar squared_distance(const RowMatrix<Scalar>& a, Eigen::Index i, const RowMatrix<Scalar>& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

/// k-means++ seeding: first center uniform, the rest by D^2 sampling.
template <typename Scalar>
RowMatrix<Scalar> seed_plus_plus(const RowMatrix<Scalar>& data, std::size_t k, std::mt19937_64& rng) {
    const auto n = data.rows();
    RowMatrix<Scalar> centers(static_cast<Eigen::Index>(k), data.cols());
    std::uniform_int_distribution<Eigen::Index> uniform(0, n - 1);
    centers.row(0) = data.row(uniform(rng));

    std::vector<double> closest(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) closest[static_cast<std::size_t>(i)] = squared_distance(data, i, centers, 0);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (const double d : closest) total += d;
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            double target = unit(rng) * total;
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= closest[static_cast<std::size_t>(i)];
                if (target < 0.0) {
                    chosen = i;
                    break;
                }
            }
            // never pick a point with zero weight, which could only happen through rounding
            while (closest[static_cast<std::size_t>(chosen)] == 0.0 && chosen > 0) --chosen;
        } else {
            chosen = uniform(rng);
        }
        centers.row(static_cast<Eigen::Index>(c)) = data.row(chosen);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = squared_distance(data, i, centers, static_cast<Eigen::Index>(c));
            auto& best = closest[static_cast<std::size_t>(i)];
            best = std::min(best, d);
        }
    }
    return centers;
}

template <typename Scalar>
Scalar assign_nearest(const RowMatrix<Scalar>& data, const RowMatrix<Scalar>& centers,
                      std::vector<std::size_t>& assignments, std::vector<Scalar>& distances) {
    Scalar total = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        Eigen::Index best = 0;
        Scalar best_d = std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const Scalar d = squared_distance(data, i, centers, c);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        assignments[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
        distances[static_cast<std::size_t>(i)] = best_d;
        total += best_d;
    }
    return total;
}

template <typename Scalar>
Scalar assigned_inertia(const RowMatrix<Scalar>& data, const RowMatrix<Scalar>& centers,
                        const std::vector<std::size_t>& assignments) {
    Scalar total = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        total += squared_distance(data, i, centers, static_cast<Eigen::Index>(assignments[static_cast<std::size_t>(i)]));
    return total;
}

/// Moves the point farthest from its centroid into each empty cluster.
template <typename Scalar>
void repair_empty_clusters(const RowMatrix<Scalar>& data, RowMatrix<Scalar>& centers,
                           std::vector<std::size_t>& assignments, std::vector<Scalar>& distances) {
    const auto k = static_cast<std::size_t>(centers.rows());
    std::vector<std::size_t> sizes(k, 0);
    for (const auto a : assignments) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] > 0) continue;
        std::size_t far = assignments.size();
        Scalar far_d = -1;
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            if (sizes[assignments[i]] > 1 && distances[i] > far_d) {
                far_d = distances[i];
                far = i;
            }
        }
        if (far == assignments.size()) throw std::logic_error("empty-cluster repair found no donor point");
        --sizes[assignments[far]];
        assignments[far] = c;
        ++sizes[c];
        distances[far] = 0;
        centers.row(static_cast<Eigen::Index>(c)) = data.row(static_cast<Eigen::Index>(far));
    }
}

template <typename Scalar>
RowMatrix<Scalar> cluster_means(const RowMatrix<Scalar>& data, const std::vector<std::size_t>& assignments,
                                std::size_t k) {
    RowMatrix<Scalar> sums = RowMatrix<Scalar>::Zero(static_cast<Eigen::Index>(k), data.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto a = assignments[static_cast<std::size_t>(i)];
        sums.row(static_cast<Eigen::Index>(a)) += data.row(i);
        ++sizes[a];
    }
    for (std::size_t c = 0; c < k; ++c) sums.row(static_cast<Eigen::Index>(c)) /= static_cast<Scalar>(sizes[c]);
    return sums;
}

/// One Lloyd run from k-means++ seeding. `data` is already in the model space.
template <typename Scalar>
ClusterModel<Scalar> lloyd(const RowMatrix<Scalar>& data, const KMeansConfig& config, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(data.rows());
    std::mt19937_64 rng(seed);
    ClusterModel<Scalar> model;
    model.centroids = seed_plus_plus(data, config.k, rng);
    model.assignments.assign(n, 0);
    std::vector<Scalar> distances(n);

    model.inertia_history.push_back(assign_nearest(data, model.centroids, model.assignments, distances));
    for (std::size_t it = 0; it < config.max_iterations; ++it) {
        if (it > 0) assign_nearest(data, model.centroids, model.assignments, distances);
        repair_empty_clusters(data, model.centroids, model.assignments, distances);
        RowMatrix<Scalar> updated = cluster_means(data, model.assignments, config.k);
        const double shift = std::sqrt(static_cast<double>((updated - model.centroids).rowwise().squaredNorm().maxCoeff()));
        model.centroids = std::move(updated);
        model.iterations_run = it + 1;
        model.inertia_history.push_back(assigned_inertia(data, model.centroids, model.assignments));
        if (shift < config.tolerance || shift == 0.0) break;
    }
    model.inertia = model.inertia_history.back();
    return model;
}

}  // namespace detail

/**
 * Lloyd's k-means from k-means++ seeding, best of `config.restarts` runs by
 * inertia. With normalize_inputs the rows are scaled to unit norm first and
 * the returned centroids live in that space. Deterministic given the seed.
 */
template <typename Derived>
ClusterModel<typename Derived::Scalar> kmeans_fit(const Eigen::MatrixBase<Derived>& vectors, const KMeansConfig& config,
                                                  std::span<const std::string> ids = {}) {
    using Scalar = typename Derived::Scalar;
    config.validate();
    const auto n = static_cast<std::size_t>(vectors.rows());
    if (n < config.k)
        throw ContractViolation("k-means needs at least k points (n=" + std::to_string(n) + ", k=" + std::to_string(config.k) + ")");
    if (!vectors.allFinite()) throw DataError("k-means input contains non-finite values");

    const RowMatrix<Scalar> data = config.normalize_inputs ? normalize_rows(vectors, ids) : RowMatrix<Scalar>(vectors);
    ClusterModel<Scalar> best;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        auto model = detail::lloyd(data, config, detail::restart_seed(config.seed, r));
        if (r == 0 || model.inertia < best.inertia) best = std::move(model);
    }
    return best;
}

/// Sum of squared distances to the assigned centroid. `vectors` must be in the
/// model space (already normalized when the model was fit with normalize_inputs).
template <typename Scalar, typename Derived>
Scalar inertia(const ClusterModel<Scalar>& model, const Eigen::MatrixBase<Derived>& vectors) {
    if (vectors.cols() != model.centroids.cols())
        throw ContractViolation("inertia: dimension mismatch (" + std::to_string(vectors.cols()) + " vs " +
                                std::to_string(model.centroids.cols()) + ")");
    if (static_cast<std::size_t>(vectors.rows()) != model.assignments.size())
        throw ContractViolation("inertia: row count does not match the model assignments");
    Scalar total = 0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i)
        total += (vectors.row(i).template cast<Scalar>() -
                  model.centroids.row(static_cast<Eigen::Index>(model.assignments[static_cast<std::size_t>(i)])))
                     .squaredNorm();
    return total;
}

struct ElbowResult {
    std::vector<std::pair<std::size_t, double>> candidates;  // (k, inertia)
    std::vector<double> knee_scores;  // perpendicular distance below the chord, normalized units
    std::size_t chosen_k = 0;
    std::vector<std::size_t> monotonicity_violations;  // k whose inertia exceeds the previous candidate's
};

/**
 * Knee scores of an inertia curve. Points are scaled to the unit square and
 * each score is the perpendicular distance below the chord from the first to
 * the last point (negative above it).
 */
inline std::vector<double> knee_scores(std::span<const std::pair<std::size_t, double>> curve) {
    std::vector<double> scores(curve.size(), 0.0);
    if (curve.size() < 3) return scores;
    const double k0 = static_cast<double>(curve.front().first);
    const double k1 = static_cast<double>(curve.back().first);
    double lo = curve.front().second, hi = curve.front().second;
    for (const auto& [k, v] : curve) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo) || !(k1 > k0)) return scores;

    const auto point = [&](std::size_t i) {
        return std::pair{(static_cast<double>(curve[i].first) - k0) / (k1 - k0), (curve[i].second - lo) / (hi - lo)};
    };
    const auto [x0, y0] = point(0);
    const auto [x1, y1] = point(curve.size() - 1);
    const double dx = x1 - x0, dy = y1 - y0;
    const double len = std::hypot(dx, dy);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const auto [x, y] = point(i);
        scores[i] = -(dx * (y - y0) - dy * (x - x0)) / len;
    }
    return scores;
}

/// Index of the largest knee score; near-ties (1e-12) resolve to the earlier candidate.
inline std::size_t choose_knee(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best] + 1e-12) best = i;
    return best;
}

inline ElbowResult elbow_from_curve(std::vector<std::pair<std::size_t, double>> curve) {
    if (curve.size() < 3) throw ContractViolation("elbow selection needs at least 3 candidates");
    ElbowResult result;
    result.candidates = std::move(curve);
    result.knee_scores = knee_scores(result.candidates);
    result.chosen_k = result.candidates[choose_knee(result.knee_scores)].first;
    for (std::size_t i = 1; i < result.candidates.size(); ++i) {
        const double prev = result.candidates[i - 1].second;
        if (result.candidates[i].second > prev + 1e-9 * std::max(1.0, std::abs(prev)))
            result.monotonicity_violations.push_back(result.candidates[i].first);
    }
    return result;
}

/// Default candidate set {2, ..., 32}.
inline std::vector<std::size_t> default_k_candidates() {
    std::vector<std::size_t> ks;
    for (std::size_t k = 2; k <= 32; ++k) ks.push_back(k);
    return ks;
}

/// Fits every candidate k (best of restarts, same seed policy) and picks the knee.
template <typename Derived>
ElbowResult select_k_elbow(const Eigen::MatrixBase<Derived>& vectors, std::span<const std::size_t> k_set,
                           KMeansConfig config, std::span<const std::string> ids = {}) {
    if (k_set.size() < 3) throw ContractViolation("elbow selection needs at least 3 candidates");
    for (std::size_t i = 0; i < k_set.size(); ++i) {
        if (i > 0 && k_set[i] <= k_set[i - 1]) throw ContractViolation("candidate k values must be strictly increasing");
        if (k_set[i] > static_cast<std::size_t>(vectors.rows()))
            throw ContractViolation("candidate k=" + std::to_string(k_set[i]) + " exceeds the number of points");
    }
    using Scalar = typename Derived::Scalar;
    const RowMatrix<Scalar> data = config.normalize_inputs ? normalize_rows(vectors, ids) : RowMatrix<Scalar>(vectors);
    config.normalize_inputs = false;

    std::vector<std::pair<std::size_t, double>> curve;
    for (const auto k : k_set) {
        config.k = k;
        curve.emplace_back(k, static_cast<double>(kmeans_fit(data, config).inertia));
    }
    return elbow_from_curve(std::move(curve));
}

}  // namespace docflow

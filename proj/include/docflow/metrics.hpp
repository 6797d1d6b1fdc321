#pragma once

#include <docflow/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace docflow {

/// Cosine similarity clamped to [-1, 1]. Zero vectors are a contract violation.
template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    const double na = a.template cast<double>().norm();
    const double nb = b.template cast<double>().norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw ContractViolation("cosine of a zero vector is undefined");
    const double dot = a.template cast<double>().cwiseProduct(b.template cast<double>()).sum();
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

/**
 * Mean cosine over all unordered pairs of distinct rows, via
 * (||sum u||^2 - n) / (n (n - 1)) on the unit-normalized rows u.
 * A single row yields 1.0.
 */
template <typename Derived>
double group_pairwise_mean(const Eigen::MatrixBase<Derived>& group) {
    const auto n = group.rows();
    if (n == 0) throw ContractViolation("pairwise mean of an empty group");
    VectorXr sum = VectorXr::Zero(group.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = group.row(i).template cast<double>();
        const double norm = row.norm();
        if (!(norm > 0.0)) throw ContractViolation("pairwise mean: zero vector in group");
        sum += row.transpose() / norm;
    }
    if (n == 1) return 1.0;
    const double nn = static_cast<double>(n);
    return std::clamp((sum.squaredNorm() - nn) / (nn * (nn - 1.0)), -1.0, 1.0);
}

struct SummaryStats {
    std::size_t groups = 0;
    double mean = 0, std = 0, min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0;
};

/// Linear-interpolation quantile by selection; reorders `work`.
inline double select_quantile(std::vector<double>& work, double q) {
    const double pos = q * static_cast<double>(work.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    auto lo_it = work.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(work.begin(), lo_it, work.end());
    const double lo_value = *lo_it;
    if (lo + 1 >= work.size()) return lo_value;
    const double hi_value = *std::min_element(lo_it + 1, work.end());
    return lo_value + (pos - static_cast<double>(lo)) * (hi_value - lo_value);
}

/**
 * Count, mean, sample standard deviation (n - 1; 0 for one value) and
 * linear-interpolation quartiles. `groups` is set to the number of values.
 */
inline SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) throw ContractViolation("summarize needs at least one value");
    SummaryStats s;
    s.groups = values.size();

    // Welford
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (const double v : values) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    s.mean = mean;
    s.std = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;

    std::vector<double> work(values.begin(), values.end());
    const auto [lo, hi] = std::minmax_element(work.begin(), work.end());
    s.min = *lo;
    s.max = *hi;
    s.q25 = select_quantile(work, 0.25);
    s.q50 = select_quantile(work, 0.50);
    s.q75 = select_quantile(work, 0.75);
    return s;
}

}  // namespace docflow

#pragma once

#include <docflow/chunker.hpp>
#include <docflow/kmeans.hpp>
#include <docflow/metrics.hpp>
#include <docflow/provider.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace docflow {

struct GroupSimilarity {
    std::size_t cluster = 0;
    std::size_t size = 0;
    double pairwise_mean = 0.0;  // 1.0 by convention for singletons
    double centroid_mean = 0.0;
};

struct GroupSimilarityReport {
    std::vector<GroupSimilarity> per_group;
    SummaryStats pairwise_summary;
    SummaryStats centroid_summary;
    std::size_t singleton_groups = 0;
};

/**
 * Per cluster: the mean cosine of members to their centroid and the mean
 * pairwise cosine between members, then both sets summarized across clusters.
 */
template <typename Scalar, typename Derived>
GroupSimilarityReport centroid_similarity_stats(const ClusterModel<Scalar>& model,
                                                const Eigen::MatrixBase<Derived>& vectors) {
    const std::size_t k = model.k();
    if (model.assignments.size() != static_cast<std::size_t>(vectors.rows()))
        throw ContractViolation("assignments do not cover the vectors");
    if (vectors.cols() != model.centroids.cols()) throw ContractViolation("centroid dimension mismatch");

    std::vector<std::vector<Eigen::Index>> members(k);
    for (std::size_t i = 0; i < model.assignments.size(); ++i) {
        if (model.assignments[i] >= k) throw ContractViolation("assignment out of range");
        members[model.assignments[i]].push_back(static_cast<Eigen::Index>(i));
    }

    GroupSimilarityReport report;
    std::vector<double> pairwise, centroid;
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) throw std::logic_error("cluster " + std::to_string(c) + " is empty");
        const MatrixXr group = vectors(members[c], Eigen::all).template cast<double>();
        const VectorXr center = model.centroids.row(static_cast<Eigen::Index>(c)).template cast<double>().transpose();
        double sum = 0.0;
        for (Eigen::Index i = 0; i < group.rows(); ++i) sum += cosine(group.row(i).transpose(), center);

        GroupSimilarity g{c, members[c].size(), group_pairwise_mean(group), sum / static_cast<double>(group.rows())};
        report.singleton_groups += g.size == 1;
        pairwise.push_back(g.pairwise_mean);
        centroid.push_back(g.centroid_mean);
        report.per_group.push_back(g);
    }
    report.pairwise_summary = summarize(pairwise);
    report.centroid_summary = summarize(centroid);
    return report;
}

/// `[{"metric": "pairwise", ...}, {"metric": "centroid", ...}]`.
std::string report_to_json(const GroupSimilarityReport& report);

inline constexpr const char* kReportCsvHeader = "Metric,Groups,Mean,Std.,Min.,25%,50%,75%,Max.";

/// Flat summary table, one row per metric: Metric, Groups, Mean, Std., Min., quartiles, Max.
std::string report_to_csv(const GroupSimilarityReport& report);

struct ThroughputReport {
    std::string provider_name;
    std::size_t docs_processed = 0;
    double elapsed_seconds = 0.0;
    double docs_per_minute = 0.0;
};

inline constexpr const char* kThroughputCsvHeader = "provider,docs,elapsed_s,docs_per_minute";

/**
 * Times end-to-end document embedding (windowing, provider call, merge)
 * serially over `docs`. Provider failures are rethrown as DataError naming
 * the document.
 */
ThroughputReport measure_throughput(EmbeddingProvider& provider, std::span<const TokenizedDocument> docs,
                                    const SlotSpec& slot = {510, 64});

std::string throughput_to_csv(std::span<const ThroughputReport> reports);

/// `doc_id,x,y,cluster`.
std::string projection_to_csv(std::span<const std::string> ids, const MatrixXr& embedding,
                              std::span<const std::size_t> clusters);

}  // namespace docflow

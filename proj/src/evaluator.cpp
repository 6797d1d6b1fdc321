#include <docflow/evaluator.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>

namespace docflow {

using json = nlohmann::json;

namespace {

json summary_json(const SummaryStats& s) {
    return {{"groups", s.groups}, {"mean", s.mean}, {"std", s.std},   {"min", s.min},
            {"q25", s.q25},       {"q50", s.q50},   {"q75", s.q75},   {"max", s.max}};
}

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string csv_row(const char* label, const SummaryStats& s) {
    std::string row = label;
    row += "," + std::to_string(s.groups);
    for (const double v : {s.mean, s.std, s.min, s.q25, s.q50, s.q75, s.max}) row += "," + fixed(v);
    return row + "\n";
}

}  // namespace

std::string report_to_json(const GroupSimilarityReport& report) {
    json pairwise_groups = json::array(), centroid_groups = json::array();
    for (const auto& g : report.per_group) {
        pairwise_groups.push_back({{"cluster", g.cluster}, {"size", g.size}, {"value", g.pairwise_mean},
                                   {"singleton", g.size == 1}});
        centroid_groups.push_back({{"cluster", g.cluster}, {"size", g.size}, {"value", g.centroid_mean}});
    }
    json out = json::array();
    out.push_back({{"metric", "pairwise"},
                   {"summary", summary_json(report.pairwise_summary)},
                   {"singleton_groups", report.singleton_groups},
                   {"per_group", std::move(pairwise_groups)}});
    out.push_back({{"metric", "centroid"},
                   {"summary", summary_json(report.centroid_summary)},
                   {"per_group", std::move(centroid_groups)}});
    return out.dump(2) + "\n";
}

std::string report_to_csv(const GroupSimilarityReport& report) {
    return std::string(kReportCsvHeader) + "\n" + csv_row("pairwise", report.pairwise_summary) +
           csv_row("centroid", report.centroid_summary);
}

ThroughputReport measure_throughput(EmbeddingProvider& provider, std::span<const TokenizedDocument> docs,
                                    const SlotSpec& slot) {
    if (docs.empty()) throw ContractViolation("throughput measurement needs at least one document");
    slot.validate();

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    for (const auto& doc : docs) {
        try {
            const auto windows = inference_windows(doc, slot);
            const auto embedded = provider.embed(doc, windows);
            const auto seq = merge_window_embeddings<float>(embedded, doc.tokens.size(), doc.doc_id);
            if (seq.matrix.rows() == 0) throw DataError("empty merge");
        } catch (const std::exception& e) {
            throw DataError("provider " + provider.name() + " failed on document " + doc.doc_id + ": " + e.what());
        }
    }
    const double elapsed = std::chrono::duration<double>(clock::now() - start).count();

    ThroughputReport report{provider.name(), docs.size(), elapsed, 0.0};
    report.docs_per_minute = static_cast<double>(docs.size()) / (elapsed / 60.0);
    return report;
}

std::string throughput_to_csv(std::span<const ThroughputReport> reports) {
    std::string out = std::string(kThroughputCsvHeader) + "\n";
    for (const auto& r : reports) {
        out += r.provider_name + "," + std::to_string(r.docs_processed) + "," + fixed(r.elapsed_seconds) + "," +
               fixed(r.docs_per_minute, 2) + "\n";
    }
    return out;
}

std::string projection_to_csv(std::span<const std::string> ids, const MatrixXr& embedding,
                              std::span<const std::size_t> clusters) {
    if (ids.size() != static_cast<std::size_t>(embedding.rows()) || clusters.size() != ids.size())
        throw ContractViolation("projection rows, ids and clusters must have the same length");
    std::string out = "doc_id,x,y,cluster\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out += ids[i] + "," + fixed(embedding(r, 0)) + "," + fixed(embedding(r, 1)) + "," + std::to_string(clusters[i]) + "\n";
    }
    return out;
}

}  // namespace docflow

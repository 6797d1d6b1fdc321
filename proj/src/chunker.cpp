#include <docflow/chunker.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace docflow {

void TokenizedDocument::validate() const {
    if (alignment.size() != tokens.size()) {
        throw DataError("document " + doc_id + ": alignment length " + std::to_string(alignment.size()) +
                        " != token count " + std::to_string(tokens.size()));
    }
    std::int32_t last = -1;
    for (std::size_t i = 0; i < alignment.size(); ++i) {
        const auto a = alignment[i];
        if (a < -1) throw DataError("document " + doc_id + ": invalid alignment at token " + std::to_string(i));
        if (a == -1) continue;
        if (a < last) throw DataError("document " + doc_id + ": alignment decreases at token " + std::to_string(i));
        last = a;
    }
}

void SlotSpec::validate() const {
    if (length < 2) throw ContractViolation("slot length must be >= 2 (got " + std::to_string(length) + ")");
    if (return_tokens >= length) {
        throw ContractViolation("return tokens K must be < slot length N (got K=" + std::to_string(return_tokens) +
                                ", N=" + std::to_string(length) + ")");
    }
}

std::string_view to_string(WindowKind kind) {
    switch (kind) {
        case WindowKind::initial: return "initial";
        case WindowKind::intermediate: return "intermediate";
        case WindowKind::final: return "final";
        case WindowKind::whole: return "whole";
    }
    return "?";
}

WindowKind parse_window_kind(std::string_view name) {
    if (name == "initial") return WindowKind::initial;
    if (name == "intermediate") return WindowKind::intermediate;
    if (name == "final") return WindowKind::final;
    if (name == "whole") return WindowKind::whole;
    throw DataError("unknown window kind '" + std::string(name) + "'");
}

SlotResult slot_fixed(std::size_t sequence_length, std::size_t window_length, std::string owner) {
    if (window_length < 2) throw ContractViolation("slot length must be >= 2");
    SlotResult result;
    const std::size_t count = sequence_length / window_length;
    result.windows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto kind = count == 1 && window_length == sequence_length ? WindowKind::whole
                          : i == 0                                       ? WindowKind::initial
                          : i + 1 == count                               ? WindowKind::final
                                                                         : WindowKind::intermediate;
        result.windows.push_back({owner, i * window_length, (i + 1) * window_length, kind});
    }
    result.dropped = sequence_length - count * window_length;
    return result;
}

SlotResult slot_overlap(std::size_t sequence_length, const SlotSpec& spec, std::string owner) {
    spec.validate();
    SlotResult result;
    const std::size_t n = spec.length;
    if (sequence_length < n) {
        result.dropped = sequence_length;
        return result;
    }
    if (sequence_length == n) {
        result.windows.push_back({std::move(owner), 0, n, WindowKind::whole});
        return result;
    }

    const std::size_t stride = spec.stride();
    result.windows.push_back({owner, 0, n, WindowKind::initial});
    std::size_t start = 0;
    while (start + stride + n <= sequence_length) {
        start += stride;
        result.windows.push_back({owner, start, start + n, WindowKind::intermediate});
    }
    if (start + n != sequence_length) {
        result.windows.push_back({owner, sequence_length - n, sequence_length, WindowKind::final});
    } else {
        result.windows.back().kind = WindowKind::final;
    }
    return result;
}

std::vector<Window> inference_windows(const TokenizedDocument& doc, const SlotSpec& spec) {
    spec.validate();
    const std::size_t length = doc.tokens.size();
    if (length == 0) throw DataError("document " + doc.doc_id + " has no tokens");
    if (length < spec.length) return {{doc.doc_id, 0, length, WindowKind::whole}};
    return slot_overlap(length, spec, doc.doc_id).windows;
}

void MaskPolicy::validate() const {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ContractViolation("mask rate must be in [0, 1]");
    if (mask_fraction < 0 || random_fraction < 0 || keep_fraction < 0)
        throw ContractViolation("mask substitution proportions must be non-negative");
    if (std::abs(mask_fraction + random_fraction + keep_fraction - 1.0) > 1e-9)
        throw ContractViolation("mask substitution proportions must sum to 1");
    if (vocab_size <= 0) throw ContractViolation("mask vocab_size must be positive");
}

std::uint64_t window_seed(std::uint64_t policy_seed, std::string_view owner, std::size_t start) {
    // FNV-1a over the owner, then mixed with the seed and offset.
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : owner) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(policy_seed), static_cast<std::uint32_t>(policy_seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(std::uint64_t{start} >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (std::uint64_t{out[0]} << 32) | out[1];
}

MaskedWindow apply_mlm_mask(std::span<const TokenId> tokens, const MaskPolicy& policy,
                            const std::vector<bool>& maskable, std::uint64_t seed) {
    policy.validate();
    if (maskable.size() != tokens.size()) throw ContractViolation("maskable flags must match the window length");

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (maskable[i]) candidates.push_back(i);

    const auto selected = static_cast<std::size_t>(std::llround(policy.rate * static_cast<double>(candidates.size())));

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first `selected` entries become a uniform sample.
    for (std::size_t i = 0; i < selected; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(selected);
    std::sort(candidates.begin(), candidates.end());

    MaskedWindow out{std::vector<TokenId>(tokens.begin(), tokens.end()), {}};
    out.labels.reserve(selected);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<TokenId> random_token(0, policy.vocab_size - 1);
    for (const auto pos : candidates) {
        out.labels.emplace_back(pos, tokens[pos]);
        const double u = unit(rng);
        if (u < policy.mask_fraction) {
            out.tokens[pos] = policy.mask_token;
        } else if (u < policy.mask_fraction + policy.random_fraction) {
            out.tokens[pos] = random_token(rng);
        }
    }
    return out;
}

std::vector<TokenBatch> concatenate_batches(std::span<const TokenizedDocument> docs, std::size_t batch_size,
                                            TokenId separator) {
    if (batch_size == 0) throw ContractViolation("batch size must be positive");
    std::vector<TokenBatch> batches;
    for (std::size_t first = 0; first < docs.size(); first += batch_size) {
        const std::size_t last = std::min(docs.size(), first + batch_size);
        TokenBatch batch;
        std::ostringstream id;
        id << "batch-" << std::setw(5) << std::setfill('0') << batches.size();
        batch.batch_id = id.str();
        for (std::size_t d = first; d < last; ++d) {
            if (d > first && separator >= 0) batch.tokens.push_back(separator);
            batch.tokens.insert(batch.tokens.end(), docs[d].tokens.begin(), docs[d].tokens.end());
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

std::string windows_to_csv(std::span<const Window> windows) {
    std::string out = "doc_id,start,end,kind\n";
    for (const auto& w : windows) {
        out += w.owner;
        out += ',' + std::to_string(w.start) + ',' + std::to_string(w.end) + ',';
        out += to_string(w.kind);
        out += '\n';
    }
    return out;
}

std::vector<Window> windows_from_csv(std::string_view csv) {
    std::vector<Window> windows;
    std::istringstream in{std::string(csv)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (line != "doc_id,start,end,kind") throw DataError("window manifest: unexpected header '" + line + "'");
            continue;
        }
        if (line.empty()) continue;
        // doc ids may contain commas; the three numeric/enum fields are at the end
        const auto c3 = line.rfind(',');
        const auto c2 = c3 == std::string::npos ? c3 : line.rfind(',', c3 - 1);
        const auto c1 = c2 == std::string::npos || c2 == 0 ? std::string::npos : line.rfind(',', c2 - 1);
        if (c1 == std::string::npos) throw DataError("window manifest line " + std::to_string(line_no) + ": malformed");
        try {
            windows.push_back({line.substr(0, c1), std::stoul(line.substr(c1 + 1, c2 - c1 - 1)),
                               std::stoul(line.substr(c2 + 1, c3 - c2 - 1)), parse_window_kind(line.substr(c3 + 1))});
        } catch (const std::logic_error&) {
            throw DataError("window manifest line " + std::to_string(line_no) + ": malformed");
        }
        if (windows.back().end <= windows.back().start)
            throw DataError("window manifest line " + std::to_string(line_no) + ": empty or reversed span");
    }
    return windows;
}

}  // namespace docflow

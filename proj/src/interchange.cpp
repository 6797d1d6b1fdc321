#include <docflow/interchange.hpp>

#include <bit>
#include <cstring>
#include <sstream>

namespace docflow {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

std::uint64_t get_u64(const unsigned char* p) {
    return std::uint64_t{get_u32(p)} | (std::uint64_t{get_u32(p + 4)} << 32);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFull) throw ContractViolation(std::string(what) + " does not fit in 32 bits");
    return static_cast<std::uint32_t>(v);
}

// Reads exactly n bytes or reports how the stream ended.
enum class ReadStatus { ok, eof, truncated };

ReadStatus read_exact(std::istream& in, unsigned char* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == n) return ReadStatus::ok;
    return got == 0 ? ReadStatus::eof : ReadStatus::truncated;
}

class Cursor {
public:
    explicit Cursor(std::string_view bytes) : bytes_(bytes) {}

    const unsigned char* take(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw DataError("docvector store is truncated");
        const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
        pos_ += n;
        return p;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

void validate_record(const InterchangeRecord& r) {
    const std::string who = "record '" + r.doc_id + "'";
    if (r.doc_id.empty()) throw DataError("record with empty doc_id");
    if (r.length == 0) throw DataError(who + ": token count is 0");
    if (r.windows.empty()) throw DataError(who + ": no windows");
    if (r.alignment.size() != r.length) {
        throw DataError(who + ": alignment length " + std::to_string(r.alignment.size()) + " != token count " +
                        std::to_string(r.length));
    }
    std::int32_t last = -1;
    for (std::size_t i = 0; i < r.alignment.size(); ++i) {
        const auto a = r.alignment[i];
        if (a < -1 || (a >= 0 && a < last))
            throw DataError(who + ": invalid alignment at token " + std::to_string(i));
        if (a >= 0) last = a;
    }
    const auto dim = r.windows.front().matrix.cols();
    if (dim == 0) throw DataError(who + ": dimension is 0");
    std::vector<Window> spans;
    for (const auto& w : r.windows) {
        if (w.window.start >= w.window.end || w.window.end > r.length) {
            throw DataError(who + ": window [" + std::to_string(w.window.start) + "," + std::to_string(w.window.end) +
                            ") out of range");
        }
        if (static_cast<std::size_t>(w.matrix.rows()) != w.window.size() || w.matrix.cols() != dim)
            throw DataError(who + ": window matrix shape mismatch");
        spans.push_back(w.window);
    }
    try {
        merge_boundaries(spans, r.length);
    } catch (const DataError& e) {
        throw DataError(who + ": " + e.what());
    }
}

std::string encode_interchange(const InterchangeRecord& r) {
    try {
        validate_record(r);
    } catch (const DataError& e) {
        throw ContractViolation(e.what());
    }
    const auto dim = static_cast<std::size_t>(r.windows.front().matrix.cols());

    std::string out(kInterchangeMagic, 4);
    put_u32(out, checked_u32(r.doc_id.size(), "doc_id length"));
    out += r.doc_id;
    put_u32(out, checked_u32(r.length, "token count"));
    put_u32(out, checked_u32(dim, "dimension"));
    put_u32(out, checked_u32(r.windows.size(), "window count"));
    for (const auto& w : r.windows) {
        put_u32(out, checked_u32(w.window.start, "window start"));
        put_u32(out, checked_u32(w.window.end, "window end"));
    }
    for (const auto a : r.alignment) put_u32(out, static_cast<std::uint32_t>(a));
    for (const auto& w : r.windows) {
        for (Eigen::Index i = 0; i < w.matrix.rows(); ++i)
            for (Eigen::Index j = 0; j < w.matrix.cols(); ++j) put_u32(out, std::bit_cast<std::uint32_t>(w.matrix(i, j)));
    }
    return out;
}

InterchangeReader::InterchangeReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw IoError("cannot read interchange file " + path_);
}

std::optional<InterchangeRecord> InterchangeReader::next() {
    const std::string where = path_ + " record " + std::to_string(index_);
    const auto fail = [&](const std::string& what) { return DataError(where + ": " + what); };
    const auto need = [&](unsigned char* dst, std::size_t n) {
        if (read_exact(in_, dst, n) != ReadStatus::ok) throw fail("truncated");
    };

    unsigned char magic[4];
    const auto status = read_exact(in_, magic, 4);
    if (status == ReadStatus::eof) return std::nullopt;
    if (status == ReadStatus::truncated || std::memcmp(magic, kInterchangeMagic, 4) != 0) throw fail("bad magic");

    unsigned char u[4];
    need(u, 4);
    const auto id_len = get_u32(u);
    if (id_len == 0 || id_len > (1u << 20)) throw fail("implausible doc_id length");
    InterchangeRecord r;
    r.doc_id.resize(id_len);
    need(reinterpret_cast<unsigned char*>(r.doc_id.data()), id_len);

    unsigned char header[12];
    need(header, 12);
    r.length = get_u32(header);
    const auto dim = get_u32(header + 4);
    const auto count = get_u32(header + 8);
    if (dim == 0) throw fail("dimension is 0");
    if (count == 0) throw fail("no windows");

    std::vector<unsigned char> buf(std::size_t{count} * 8);
    need(buf.data(), buf.size());
    std::vector<Window> spans(count);
    for (std::uint32_t w = 0; w < count; ++w) {
        spans[w] = {r.doc_id, get_u32(&buf[w * 8]), get_u32(&buf[w * 8 + 4]), WindowKind::intermediate};
        if (spans[w].start >= spans[w].end || spans[w].end > r.length) throw fail("window out of range");
    }
    if (count == 1) {
        spans[0].kind = WindowKind::whole;
    } else {
        spans.front().kind = WindowKind::initial;
        spans.back().kind = WindowKind::final;
    }

    buf.resize(r.length * 4);
    need(buf.data(), buf.size());
    r.alignment.resize(r.length);
    for (std::size_t i = 0; i < r.length; ++i) r.alignment[i] = static_cast<std::int32_t>(get_u32(&buf[i * 4]));

    for (auto& span : spans) {
        const std::size_t rows = span.size();
        buf.resize(rows * dim * 4);
        need(buf.data(), buf.size());
        MatrixXf32 m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    std::bit_cast<float>(get_u32(&buf[(i * dim + j) * 4]));
        r.windows.push_back({std::move(span), std::move(m)});
    }

    try {
        validate_record(r);
    } catch (const DataError& e) {
        throw fail(e.what());
    }
    ++index_;
    return r;
}

std::vector<InterchangeRecord> read_interchange(const std::filesystem::path& path) {
    InterchangeReader reader(path);
    std::vector<InterchangeRecord> out;
    while (auto r = reader.next()) out.push_back(std::move(*r));
    return out;
}

std::vector<std::string> validate_interchange(const std::filesystem::path& path) {
    std::vector<std::string> errors;
    try {
        InterchangeReader reader(path);
        while (reader.next()) {
        }
    } catch (const std::exception& e) {
        errors.emplace_back(e.what());
    }
    return errors;
}

std::string encode_docvectors(const DocVectorStore& store) {
    if (static_cast<std::size_t>(store.vectors.rows()) != store.ids.size())
        throw ContractViolation("docvector store: id count does not match row count");
    std::string out(kDocVectorMagic, 4);
    put_u32(out, checked_u32(store.ids.size(), "document count"));
    put_u32(out, checked_u32(static_cast<std::size_t>(store.vectors.cols()), "dimension"));
    for (std::size_t i = 0; i < store.ids.size(); ++i) {
        put_u32(out, checked_u32(store.ids[i].size(), "id length"));
        out += store.ids[i];
        for (Eigen::Index j = 0; j < store.vectors.cols(); ++j)
            put_u64(out, std::bit_cast<std::uint64_t>(store.vectors(static_cast<Eigen::Index>(i), j)));
    }
    return out;
}

DocVectorStore decode_docvectors(std::string_view bytes) {
    Cursor cur(bytes);
    if (std::memcmp(cur.take(4), kDocVectorMagic, 4) != 0) throw DataError("docvector store: bad magic");
    const auto count = get_u32(cur.take(4));
    const auto dim = get_u32(cur.take(4));
    DocVectorStore store;
    store.vectors.resize(count, dim);
    store.ids.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = get_u32(cur.take(4));
        const auto* p = cur.take(len);
        store.ids.emplace_back(reinterpret_cast<const char*>(p), len);
        for (std::uint32_t j = 0; j < dim; ++j) store.vectors(i, j) = std::bit_cast<double>(get_u64(cur.take(8)));
    }
    if (!cur.done()) throw DataError("docvector store: trailing bytes");
    return store;
}

DocVectorStore read_docvectors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return decode_docvectors(buffer.str());
}

std::string docvector_index_csv(const DocVectorStore& store) {
    std::string out = "doc_id,row\n";
    for (std::size_t i = 0; i < store.ids.size(); ++i) out += store.ids[i] + "," + std::to_string(i) + "\n";
    return out;
}

}  // namespace docflow

#include <docflow/vectorizer.hpp>

namespace docflow {

std::vector<std::size_t> merge_boundaries(std::span<const Window> windows, std::size_t length) {
    if (windows.empty()) throw DataError("no windows to merge");
    if (windows.front().start != 0)
        throw DataError("coverage gap: positions [0," + std::to_string(windows.front().start) + ") have no window");

    std::vector<std::size_t> bounds{0};
    std::size_t covered = windows.front().end;
    for (std::size_t i = 1; i < windows.size(); ++i) {
        const auto& prev = windows[i - 1];
        const auto& cur = windows[i];
        if (cur.start < prev.start || cur.end < prev.end) throw DataError("windows are not sorted by start");
        if (cur.start > covered) {
            throw DataError("coverage gap: positions [" + std::to_string(covered) + "," + std::to_string(cur.start) +
                            ") have no window");
        }
        // Odd overlaps give the extra position to the previous window.
        const std::size_t overlap = prev.end > cur.start ? prev.end - cur.start : 0;
        bounds.push_back(cur.start + (overlap + 1) / 2);
        covered = std::max(covered, cur.end);
    }
    if (covered < length) {
        throw DataError("coverage gap: positions [" + std::to_string(covered) + "," + std::to_string(length) +
                        ") have no window");
    }
    if (covered > length) throw DataError("window ends past the document length " + std::to_string(length));
    return bounds;
}

std::vector<std::size_t> merge_assignment(std::span<const Window> windows, std::size_t length) {
    const auto bounds = merge_boundaries(windows, length);
    std::vector<std::size_t> owner(length);
    for (std::size_t w = 0; w < bounds.size(); ++w) {
        const std::size_t end = w + 1 < bounds.size() ? bounds[w + 1] : length;
        for (std::size_t p = bounds[w]; p < end; ++p) owner[p] = w;
    }
    return owner;
}

}  // namespace docflow

#include "qstrum/citations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace qstrum {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

// Parses "3" / " 4 , 12 " into integers; false when any item is not a plain integer.
bool parse_index_list(std::string_view body, std::vector<int>& out) {
    out.clear();
    if (trim(body).empty()) return false;
    std::size_t start = 0;
    while (start <= body.size()) {
        const auto comma = body.find(',', start);
        const auto item = trim(body.substr(start, comma == std::string_view::npos ? body.npos
                                                                                  : comma - start));
        if (item.empty()) return false;
        std::string_view digits = item;
        if (digits.front() == '+' ) digits.remove_prefix(1);
        int value = 0;
        const auto* first = digits.data();
        const auto* last = digits.data() + digits.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) return false;
        out.push_back(value);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return !out.empty();
}

}  // namespace

std::vector<CitationMarker> find_citation_markers(std::string_view text) {
    std::vector<CitationMarker> markers;
    std::size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string_view::npos) {
        const auto close = text.find(']', pos + 1);
        if (close == std::string_view::npos) break;
        const auto inner = text.substr(pos + 1, close - pos - 1);
        // A nested '[' means this bracket was not closed by `close`; rescan from the inner one.
        if (const auto nested = inner.find('['); nested != std::string_view::npos) {
            pos = pos + 1 + nested;
            continue;
        }
        CitationMarker marker;
        if (parse_index_list(inner, marker.indices)) {
            marker.offset = pos;
            marker.length = close - pos + 1;
            markers.push_back(std::move(marker));
        }
        pos = close + 1;
    }
    return markers;
}

std::vector<int> cited_indices(std::string_view text) {
    std::vector<int> out;
    for (const auto& marker : find_citation_markers(text)) {
        for (int idx : marker.indices) {
            if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
        }
    }
    return out;
}

std::string format_citation(const std::vector<int>& indices) {
    std::string out = "[";
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(indices[i]);
    }
    out += ']';
    return out;
}

}  // namespace qstrum

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qstrum {

/// One `[...]` marker whose contents are comma-separated integers, e.g. "[3]" or "[4, 12]".
struct CitationMarker {
    std::size_t offset = 0;  ///< position of '[' in the scanned text
    std::size_t length = 0;  ///< through the closing ']'
    std::vector<int> indices;
};

/// Scans text for citation markers. Brackets holding anything other than integers
/// ("[sentence #]", "[citation]") are prose and are skipped.
std::vector<CitationMarker> find_citation_markers(std::string_view text);

/// Distinct cited indices in order of first appearance.
std::vector<int> cited_indices(std::string_view text);

/// Formats indices as a marker: {3} -> "[3]", {1, 7} -> "[1, 7]".
std::string format_citation(const std::vector<int>& indices);

}  // namespace qstrum

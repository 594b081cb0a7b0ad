#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qstrum/domain.hpp"

namespace qstrum {

/// Locates and parses the first balanced JSON object in a model completion.
///
/// Markdown code fences are searched first, then the whole text. Braces inside JSON
/// strings are ignored while balancing. A candidate that fails to parse is retried
/// once with trailing commas removed before the scan moves on to the next '{'.
/// Throws JsonExtractError (carrying the raw text) when nothing parses.
Json extract_json(std::string_view text);

/// Byte range [begin, end) of the balanced object starting at `open`, or nullopt.
std::optional<std::pair<std::size_t, std::size_t>> balanced_object_at(std::string_view text, std::size_t open);

/// Removes commas that directly precede '}' or ']' outside of strings.
std::string strip_trailing_commas(std::string_view json);

}  // namespace qstrum

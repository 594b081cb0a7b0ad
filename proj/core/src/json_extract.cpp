#include "qstrum/json_extract.hpp"

#include <cctype>
#include <vector>

#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

std::optional<Json> try_parse(std::string_view candidate) {
    Json parsed = Json::parse(candidate.begin(), candidate.end(), nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
    return parsed;
}

std::optional<Json> first_object(std::string_view text) {
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
        if (auto range = balanced_object_at(text, pos)) {
            const auto candidate = text.substr(range->first, range->second - range->first);
            if (auto parsed = try_parse(candidate)) return parsed;
            if (auto repaired = try_parse(strip_trailing_commas(candidate))) return repaired;
        }
        ++pos;
    }
    return std::nullopt;
}

// Bodies of ``` fenced blocks, in order. The info string ("json") is dropped.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
    std::vector<std::string_view> blocks;
    std::size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string_view::npos) {
        auto body_start = text.find('\n', pos + 3);
        if (body_start == std::string_view::npos) break;
        ++body_start;
        const auto close = text.find("```", body_start);
        if (close == std::string_view::npos) {
            blocks.push_back(text.substr(body_start));
            break;
        }
        blocks.push_back(text.substr(body_start, close - body_start));
        pos = close + 3;
    }
    return blocks;
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> balanced_object_at(std::string_view text, std::size_t open) {
    if (open >= text.size() || text[open] != '{') return std::nullopt;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ']') {
            if (--depth == 0) {
                if (c != '}') return std::nullopt;
                return std::make_pair(open, i + 1);
            }
            if (depth < 0) return std::nullopt;
        }
    }
    return std::nullopt;
}

std::string strip_trailing_commas(std::string_view json) {
    std::string out;
    out.reserve(json.size());
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = 0; i < json.size(); ++i) {
        const char c = json[i];
        if (in_string) {
            out.push_back(c);
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') in_string = true;
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < json.size() && std::isspace(static_cast<unsigned char>(json[j]))) ++j;
            if (j < json.size() && (json[j] == '}' || json[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

Json extract_json(std::string_view text) {
    for (const auto block : fenced_blocks(text)) {
        if (auto parsed = first_object(block)) return std::move(*parsed);
    }
    if (auto parsed = first_object(text)) return std::move(*parsed);
    throw JsonExtractError("no balanced JSON object found in model output", std::string(text));
}

}  // namespace qstrum

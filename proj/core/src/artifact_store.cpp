#include "qstrum/artifact_store.hpp"

#include <cctype>
#include <system_error>

#include "qstrum/content_store.hpp"
#include "qstrum/errors.hpp"

namespace qstrum {

std::string slugify(std::string_view text) {
    std::string out;
    bool dash = false;
    for (unsigned char c : text) {
        if (std::isalnum(c) != 0) {
            if (dash && !out.empty()) out += '-';
            out += static_cast<char>(std::tolower(c));
            dash = false;
        } else {
            dash = true;
        }
    }
    return out.empty() ? "x" : out;
}

std::string path_component(std::string_view id) {
    std::string out;
    for (unsigned char c : id) {
        out += (std::isalnum(c) != 0 || c == '-' || c == '_' || c == '.') ? static_cast<char>(c) : '_';
    }
    if (out.empty() || out.find_first_not_of('.') == std::string::npos) out = "_" + out;
    return out;
}

ArtifactStore::ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path ArtifactStore::path_for(std::string_view query_id, std::string_view variant,
                                              std::string_view stage, std::string_view slug) const {
    std::string file(stage);
    if (!slug.empty()) {
        file += '.';
        file += slug;
    }
    file += ".json";
    return root_ / path_component(query_id) / std::string(variant) / file;
}

void ArtifactStore::write(std::string_view query_id, std::string_view variant, std::string_view stage,
                          const Json& value, std::string_view slug) const {
    write_file_atomic(path_for(query_id, variant, stage, slug), canonical_dump(value));
}

std::optional<Json> ArtifactStore::read(std::string_view query_id, std::string_view variant,
                                        std::string_view stage, std::string_view slug) const {
    const auto path = path_for(query_id, variant, stage, slug);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void ArtifactStore::write_manifest(const Json& manifest) const {
    write_file_atomic(root_ / "manifest.json", canonical_dump(manifest));
}

std::optional<Json> ArtifactStore::read_manifest() const {
    const auto path = root_ / "manifest.json";
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

}  // namespace qstrum

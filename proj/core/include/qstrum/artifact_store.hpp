#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "qstrum/domain.hpp"

namespace qstrum {

/// Lowercase ASCII alphanumerics with runs of anything else collapsed to '-'.
/// Returns "x" when nothing survives.
std::string slugify(std::string_view text);

/// File-name-safe form of an id: keeps [A-Za-z0-9._-], maps anything else to '_',
/// and prefixes '_' to empty or dot-only results.
std::string path_component(std::string_view id);

/// Per-run directory of stage artifacts:
/// `<root>/<query_id>/<variant>/<stage>[.<slug>].json` plus `<root>/manifest.json`.
///
/// Every (query, variant, stage, slug) maps to its own file, so concurrent writers
/// for different queries or aspects never touch the same path.
class ArtifactStore {
public:
    explicit ArtifactStore(std::filesystem::path root);

    std::filesystem::path path_for(std::string_view query_id, std::string_view variant, std::string_view stage,
                                   std::string_view slug = {}) const;

    void write(std::string_view query_id, std::string_view variant, std::string_view stage, const Json& value,
               std::string_view slug = {}) const;
    std::optional<Json> read(std::string_view query_id, std::string_view variant, std::string_view stage,
                             std::string_view slug = {}) const;

    void write_manifest(const Json& manifest) const;
    std::optional<Json> read_manifest() const;

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
};

}  // namespace qstrum

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qstrum/domain.hpp"

namespace qstrum {

/// Directory of JSON documents addressed by a hex digest (`<dir>/<key>.json`).
///
/// Writes go to a unique temporary file that is then renamed over the target, so
/// concurrent writers of the same key leave one complete document behind.
class ContentStore {
public:
    explicit ContentStore(std::filesystem::path dir);

    std::optional<Json> get(const std::string& key) const;
    void put(const std::string& key, const Json& value) const;
    bool contains(const std::string& key) const;

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path dir_;
};

/// Writes `contents` to `path` via temp-file-then-rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace qstrum

#include "qstrum/content_store.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "qstrum/errors.hpp"

namespace qstrum {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view contents) {
    static std::atomic<unsigned long> counter{0};
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ostringstream suffix;
    suffix << ".tmp." << ::getpid() << '.' << std::this_thread::get_id() << '.' << counter.fetch_add(1);
    const fs::path tmp = path.string() + suffix.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ContentStore::ContentStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path ContentStore::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

bool ContentStore::contains(const std::string& key) const { return fs::exists(path_for(key)); }

std::optional<Json> ContentStore::get(const std::string& key) const {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    Json parsed = Json::parse(in, nullptr, /*allow_exceptions=*/false);
    // A truncated or foreign file is treated as a miss and will be overwritten.
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

void ContentStore::put(const std::string& key, const Json& value) const {
    write_file_atomic(path_for(key), canonical_dump(value));
}

}  // namespace qstrum

#include "qstrum_app/config.hpp"

#include <charconv>
#include <cstdlib>
#include <set>

#include "qstrum/content_store.hpp"
#include "qstrum/errors.hpp"
#include "qstrum/pipeline.hpp"
#include "qstrum/validation.hpp"

namespace qstrum::app {
namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError(key + ": not a number: '" + value + "'");
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto item = trim(std::string_view(value).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string RunConfig::dataset_label() const {
    if (!dataset.empty()) return dataset;
    auto name = std::filesystem::absolute(workspace).lexically_normal().filename().string();
    if (name.empty()) name = std::filesystem::absolute(workspace).lexically_normal().parent_path().filename().string();
    return name.empty() ? "dataset" : name;
}

std::filesystem::path RunConfig::llm_cache_dir() const {
    return cache_dir ? *cache_dir / "llm" : workspace / "cache" / "llm";
}

std::filesystem::path RunConfig::embed_cache_dir() const {
    return cache_dir ? *cache_dir / "embed" : workspace / "cache" / "embed";
}

Json RunConfig::snapshot() const {
    Json backends_json = Json::object();
    for (const auto& [id, b] : backends) {
        backends_json[id] = Json{{"kind", b.kind},
                                 {"base_url", b.base_url},
                                 {"model_name", b.model_name},
                                 {"api_key_env", b.api_key_env},
                                 {"timeout", b.timeout_seconds}};
    }
    return Json{{"dataset", dataset_label()},
                {"model", model},
                {"judge_models", judge_models},
                {"embed_model", embed_model},
                {"variant", variant},
                {"tone", tone},
                {"k", k},
                {"retries", retries},
                {"temperature", temperature},
                {"max_tokens", max_tokens},
                {"seed", seed},
                {"strictness", strictness},
                {"bootstrap_iterations", bootstrap_iterations},
                {"backends", std::move(backends_json)}};
}

std::optional<std::string> getenv_lookup(const std::string& name) {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

std::string expand_env(std::string_view text, const EnvLookup& env) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find("${", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        out.append(text.substr(pos, open - pos));
        const auto close = text.find('}', open + 2);
        if (close == std::string_view::npos) throw ConfigError("unterminated ${ in '" + std::string(text) + "'");
        const std::string name(text.substr(open + 2, close - open - 2));
        const auto value = env(name);
        if (!value) throw ConfigError("environment variable " + name + " is not set");
        out += *value;
        pos = close + 1;
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text, const EnvLookup& env,
                                                                   std::string_view source) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto line = trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(where + "empty key");
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
        try {
            out.emplace_back(key, expand_env(trim(line.substr(eq + 1)), env));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    if (key.starts_with("backend.")) {
        const auto dot = key.rfind('.');
        const auto id = key.substr(8, dot - 8);
        if (dot <= 8 || id.empty()) throw ConfigError("malformed backend key '" + key + "'");
        auto& b = c.backends[id];
        b.id = id;
        const auto field = key.substr(dot + 1);
        if (field == "kind") {
            if (value != "openai" && value != "anthropic" && value != "openai-embedding") {
                throw ConfigError(key + ": unknown kind '" + value + "' (expected openai, anthropic or openai-embedding)");
            }
            b.kind = value;
        } else if (field == "base_url") {
            b.base_url = value;
        } else if (field == "model_name") {
            b.model_name = value;
        } else if (field == "api_key_env") {
            b.api_key_env = value;
        } else if (field == "timeout") {
            b.timeout_seconds = parse_number<int>(key, value);
        } else {
            throw ConfigError("unknown backend setting '" + key + "'");
        }
        return;
    }
    if (key == "workspace") c.workspace = value;
    else if (key == "snippets") c.snippets = value;
    else if (key == "queries") c.queries = value;
    else if (key == "dataset") c.dataset = value;
    else if (key == "model") c.model = value;
    else if (key == "judge_model") c.judge_models = split_list(value);
    else if (key == "embed_model") c.embed_model = value;
    else if (key == "variant") c.variant = value;
    else if (key == "tone") c.tone = value;
    else if (key == "k") c.k = parse_number<std::size_t>(key, value);
    else if (key == "retries") c.retries = parse_number<int>(key, value);
    else if (key == "temperature") c.temperature = parse_number<double>(key, value);
    else if (key == "max_tokens") c.max_tokens = parse_number<int>(key, value);
    else if (key == "cache_dir") c.cache_dir = value;
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "parallel") c.parallel = parse_number<std::size_t>(key, value);
    else if (key == "strictness") c.strictness = value;
    else if (key == "run_id") c.run_id = value;
    else if (key == "bootstrap_iterations") c.bootstrap_iterations = parse_number<int>(key, value);
    else throw ConfigError("unknown setting '" + key + "'");
}

RunConfig load_config_file(const std::filesystem::path& path, const EnvLookup& env) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    RunConfig config;
    for (const auto& [key, value] : parse_config_text(read_file(path), env, path.string())) {
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    return config;
}

void validate_config(const RunConfig& c) {
    try {
        Variant::make(parse_variant_kind(c.variant), parse_tone(c.tone));
        parse_strictness(c.strictness);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (c.k < 1) throw ConfigError("k must be at least 1");
    if (c.parallel < 1) throw ConfigError("parallel must be at least 1");
    if (c.retries < 0) throw ConfigError("retries must not be negative");
    if (c.temperature < 0.0) throw ConfigError("temperature must not be negative");
    if (c.max_tokens < 1) throw ConfigError("max_tokens must be positive");
    if (c.bootstrap_iterations < 1) throw ConfigError("bootstrap_iterations must be positive");
    if (c.judge_models.empty()) throw ConfigError("no judge model configured");
    for (const auto& [id, b] : c.backends) {
        if (b.kind.empty()) throw ConfigError("backend." + id + ".kind is required");
        if (b.base_url.empty()) throw ConfigError("backend." + id + ".base_url is required");
        if (b.api_key_env.empty()) throw ConfigError("backend." + id + ".api_key_env is required");
    }
}

}  // namespace qstrum::app

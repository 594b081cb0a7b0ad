#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qstrum/domain.hpp"

namespace qstrum::app {

/// A hosted model declared in the config file under `backend.<id>.*`.
struct BackendSpec {
    std::string id;
    std::string kind;  ///< openai, anthropic or openai-embedding
    std::string base_url;
    std::string model_name;
    std::string api_key_env;
    int timeout_seconds = 120;
};

struct RunConfig {
    std::filesystem::path workspace = ".";
    std::optional<std::filesystem::path> snippets;
    std::optional<std::filesystem::path> queries;
    std::string dataset;  ///< label used in report columns; defaults to the workspace directory name
    std::string model = "mock";
    std::vector<std::string> judge_models = {"mock-judge"};
    std::string embed_model = "mock-embed";
    std::string variant = "base";
    std::string tone = "standard";
    std::size_t k = 50;
    int retries = 2;
    double temperature = 0.0;
    int max_tokens = 4096;
    std::optional<std::filesystem::path> cache_dir;
    std::uint64_t seed = 0;
    std::size_t parallel = 1;
    std::string strictness = "strict";
    std::string run_id;
    int bootstrap_iterations = 10000;
    std::map<std::string, BackendSpec> backends;

    std::string dataset_label() const;
    std::filesystem::path llm_cache_dir() const;
    std::filesystem::path embed_cache_dir() const;

    /// Every setting except credentials, in a stable order, for run manifests.
    Json snapshot() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Process environment.
std::optional<std::string> getenv_lookup(const std::string& name);

/// Replaces each `${NAME}` with the variable's value. Throws ConfigError on an
/// unset variable or an unterminated reference.
std::string expand_env(std::string_view text, const EnvLookup& env);

/// `key = value` lines; blank lines and lines starting with '#' are ignored.
/// Values are trimmed and env-expanded. Throws ConfigError naming `source` and the
/// line for malformed lines or repeated keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text, const EnvLookup& env,
                                                                   std::string_view source = "<config>");

/// Applies one setting. Throws ConfigError for unknown keys and invalid values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

RunConfig load_config_file(const std::filesystem::path& path, const EnvLookup& env = getenv_lookup);

/// Cross-field checks (tone only with debate, k >= 1, parsable enums).
void validate_config(const RunConfig& config);

}  // namespace qstrum::app

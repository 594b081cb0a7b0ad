#include "qstrum/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>

#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base_url '" + url + "' has no scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) out.prefix = url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

std::string resolve_key(const HttpEndpointConfig& config) {
    if (config.api_key_env.empty()) return {};
    const char* value = std::getenv(config.api_key_env.c_str());
    if (value == nullptr || *value == '\0') {
        throw ConfigError("environment variable " + config.api_key_env + " for model " + config.id + " is not set");
    }
    return value;
}

void check_config(HttpEndpointConfig& config) {
    if (config.id.empty()) throw ConfigError("HTTP backend needs a model id");
    if (config.base_url.empty()) throw ConfigError("model " + config.id + " has no base_url");
    if (config.model_name.empty()) config.model_name = config.id;
    split_url(config.base_url);
}

Json post_json(const HttpEndpointConfig& config, const std::string& path, const httplib::Headers& headers,
               const Json& body) {
    const auto url = split_url(config.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);
    const auto result = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!result) {
        throw TransientBackendError(config.id + ": request failed: " + httplib::to_string(result.error()));
    }
    const auto status = result->status;
    if (status == 429) throw RateLimitError(config.id + ": rate limited (HTTP 429)");
    if (status == 401 || status == 403 || status == 408 || status >= 500) {
        throw TransientBackendError(config.id + ": HTTP " + std::to_string(status) + ": " + result->body);
    }
    if (status < 200 || status >= 300) {
        throw BackendError(config.id + ": HTTP " + std::to_string(status) + ": " + result->body, 1);
    }
    Json parsed = Json::parse(result->body, nullptr, false);
    if (parsed.is_discarded()) throw TransientBackendError(config.id + ": response is not JSON");
    return parsed;
}

}  // namespace

ApiKind parse_api_kind(std::string_view s) {
    if (s == "openai") return ApiKind::openai;
    if (s == "anthropic") return ApiKind::anthropic;
    throw ConfigError("unknown API kind '" + std::string(s) + "' (expected openai or anthropic)");
}

HttpChatBackend::HttpChatBackend(HttpEndpointConfig config) : config_(std::move(config)) {
    check_config(config_);
    api_key_ = resolve_key(config_);
}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
    ChatResponse response;
    response.backend_id = config_.id;
    const Json messages = Json::array({Json{{"role", "user"}, {"content", request.prompt}}});
    try {
        if (config_.api == ApiKind::openai) {
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            const Json body{{"model", config_.model_name},
                            {"messages", messages},
                            {"temperature", request.temperature},
                            {"max_tokens", request.max_tokens}};
            const auto reply = post_json(config_, "/v1/chat/completions", headers, body);
            response.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (const auto usage = reply.find("usage"); usage != reply.end()) {
                response.usage.prompt_tokens = usage->value("prompt_tokens", 0L);
                response.usage.completion_tokens = usage->value("completion_tokens", 0L);
            }
        } else {
            httplib::Headers headers{{"anthropic-version", "2023-06-01"}};
            if (!api_key_.empty()) headers.emplace("x-api-key", api_key_);
            const Json body{{"model", config_.model_name},
                            {"messages", messages},
                            {"temperature", request.temperature},
                            {"max_tokens", request.max_tokens}};
            const auto reply = post_json(config_, "/v1/messages", headers, body);
            for (const auto& block : reply.at("content")) {
                if (block.value("type", "") == "text") response.text += block.at("text").get<std::string>();
            }
            if (const auto usage = reply.find("usage"); usage != reply.end()) {
                response.usage.prompt_tokens = usage->value("input_tokens", 0L);
                response.usage.completion_tokens = usage->value("output_tokens", 0L);
            }
        }
    } catch (const Json::exception& e) {
        throw TransientBackendError(config_.id + ": unexpected response shape: " + e.what());
    }
    if (response.text.empty()) throw TransientBackendError(config_.id + ": empty completion");
    return response;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEndpointConfig config) : config_(std::move(config)) {
    check_config(config_);
    if (config_.api != ApiKind::openai) throw ConfigError("embeddings require an openai-compatible API");
    api_key_ = resolve_key(config_);
}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed(std::span<const std::string> texts) {
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const Json body{{"model", config_.model_name}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto reply = post_json(config_, "/v1/embeddings", headers, body);
    std::vector<EmbeddingVector> out(texts.size());
    try {
        for (const auto& item : reply.at("data")) {
            const auto index = item.value("index", static_cast<std::size_t>(0));
            if (index >= out.size()) throw TransientBackendError(config_.id + ": embedding index out of range");
            out[index].values = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const Json::exception& e) {
        throw TransientBackendError(config_.id + ": unexpected response shape: " + e.what());
    }
    for (const auto& v : out) {
        if (v.values.empty()) throw TransientBackendError(config_.id + ": missing embedding in response");
    }
    return out;
}

}  // namespace qstrum

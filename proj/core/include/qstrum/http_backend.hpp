#pragma once

#include <string>

#include "qstrum/embedding.hpp"
#include "qstrum/gateway.hpp"

namespace qstrum {

enum class ApiKind { openai, anthropic };

ApiKind parse_api_kind(std::string_view s);

/// Where and how to reach a hosted model. The API key is read from the
/// environment variable named by `api_key_env` when the backend is constructed.
struct HttpEndpointConfig {
    std::string id;          ///< model id used inside this program
    ApiKind api = ApiKind::openai;
    std::string base_url;    ///< e.g. https://api.openai.com
    std::string model_name;  ///< model name sent to the API; defaults to `id`
    std::string api_key_env;
    int timeout_seconds = 120;
};

/// Chat completions over OpenAI-compatible (/v1/chat/completions) or Anthropic
/// (/v1/messages) HTTP APIs. 429 maps to RateLimitError; connection failures,
/// auth failures and 5xx map to TransientBackendError.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpEndpointConfig config);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return config_.id; }
    bool remote() const override { return true; }

private:
    HttpEndpointConfig config_;
    std::string api_key_;
};

/// OpenAI-compatible /v1/embeddings.
class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(HttpEndpointConfig config);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::string id() const override { return config_.id; }
    bool remote() const override { return true; }

private:
    HttpEndpointConfig config_;
    std::string api_key_;
};

}  // namespace qstrum

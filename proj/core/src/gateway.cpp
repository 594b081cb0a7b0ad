#include "qstrum/gateway.hpp"

#include "qstrum/errors.hpp"
#include "qstrum/hashing.hpp"

namespace qstrum {

void to_json(Json& j, const TokenUsage& v) {
    j = Json{{"prompt_tokens", v.prompt_tokens}, {"completion_tokens", v.completion_tokens}};
}

void from_json(const Json& j, TokenUsage& v) {
    v.prompt_tokens = j.value("prompt_tokens", 0L);
    v.completion_tokens = j.value("completion_tokens", 0L);
}

CacheKey CacheKey::of(const ChatRequest& request) {
    const Json fields{{"model_id", request.model_id},
                      {"prompt", request.prompt},
                      {"temperature", request.temperature},
                      {"max_tokens", request.max_tokens}};
    return CacheKey{sha256_hex(fields.dump(-1, ' ', false, Json::error_handler_t::replace))};
}

Gateway::Gateway(Options options)
    : options_(std::move(options)), in_flight_(options_.max_in_flight) {
    if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
}

void Gateway::register_model(const std::string& model_id, std::shared_ptr<ChatBackend> backend) {
    std::unique_lock lock(models_mu_);
    models_[model_id] = std::move(backend);
}

bool Gateway::knows(const std::string& model_id) const {
    std::shared_lock lock(models_mu_);
    return models_.contains(model_id);
}

std::shared_ptr<ChatBackend> Gateway::backend_for(const std::string& model_id) const {
    std::shared_lock lock(models_mu_);
    const auto it = models_.find(model_id);
    return it == models_.end() ? nullptr : it->second;
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    auto backend = backend_for(request.model_id);
    if (!backend) throw ConfigError("unknown model id '" + request.model_id + "'");
    if (request.prompt.empty()) throw ConfigError("empty prompt for request " + request.request_tag);
    if (request.temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (request.max_tokens <= 0) throw ConfigError("max_tokens must be > 0");

    ++requests_;
    const auto key = CacheKey::of(request);
    if (cache_) {
        if (auto entry = cache_->get(key.digest)) {
            const auto& stored = entry->at("response");
            ChatResponse response;
            response.text = stored.at("text").get<std::string>();
            response.usage = stored.at("usage").get<TokenUsage>();
            response.backend_id = stored.at("backend_id").get<std::string>();
            response.cache_hit = true;
            ++cache_hits_;
            return response;
        }
    }

    ChatResponse response = call_with_retries(
        options_.retry, options_.sleep,
        [&] {
            in_flight_.acquire();
            struct Release {
                Semaphore& s;
                ~Release() { s.release(); }
            } release{in_flight_};
            ++backend_calls_;
            if (backend->remote()) ++network_calls_;
            return backend->complete(request);
        },
        [&] { ++retries_; });
    response.cache_hit = false;
    if (response.backend_id.empty()) response.backend_id = backend->id();

    if (cache_) {
        Json entry{{"key", key.digest},
                   {"request",
                    {{"model_id", request.model_id},
                     {"temperature", request.temperature},
                     {"max_tokens", request.max_tokens},
                     {"request_tag", request.request_tag},
                     {"prompt", request.prompt}}},
                   {"response",
                    {{"text", response.text}, {"usage", response.usage}, {"backend_id", response.backend_id}}}};
        cache_->put(key.digest, entry);
    }
    return response;
}

Gateway::Stats Gateway::stats() const {
    return Stats{requests_.load(), cache_hits_.load(), backend_calls_.load(), network_calls_.load(),
                 retries_.load()};
}

}  // namespace qstrum

#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "qstrum/content_store.hpp"
#include "qstrum/retry.hpp"

namespace qstrum {

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& o) {
        prompt_tokens += o.prompt_tokens;
        completion_tokens += o.completion_tokens;
        return *this;
    }
    bool operator==(const TokenUsage&) const = default;
};

void to_json(Json& j, const TokenUsage& v);
void from_json(const Json& j, TokenUsage& v);

inline constexpr double kDefaultTemperature = 0.0;
inline constexpr int kDefaultMaxTokens = 4096;

struct ChatRequest {
    std::string model_id;
    std::string prompt;
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
    std::string request_tag;  ///< stage or purpose label, e.g. "filter" or "judge"
};

struct ChatResponse {
    std::string text;
    TokenUsage usage;
    bool cache_hit = false;
    std::string backend_id;
};

/// SHA-256 over the canonical JSON of (model_id, prompt, temperature, max_tokens).
/// The request tag is not part of the key.
struct CacheKey {
    std::string digest;

    static CacheKey of(const ChatRequest& request);
    bool operator==(const CacheKey&) const = default;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// One attempt. Throw TransientBackendError / RateLimitError for retryable failures.
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
    /// True when a call leaves the process (counted as a network call).
    virtual bool remote() const { return false; }
};

/// Counting semaphore with a runtime bound.
class Semaphore {
public:
    explicit Semaphore(std::size_t count) : count_(count == 0 ? 1 : count) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return count_ > 0; });
        --count_;
    }
    void release() {
        {
            std::lock_guard lock(mu_);
            ++count_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::size_t count_;
};

/// Chat-completion front door: model routing, response cache, retries and an
/// in-flight bound. Safe to call from many threads.
class Gateway {
public:
    struct Options {
        RetryPolicy retry;
        std::size_t max_in_flight = 4;
        std::optional<std::filesystem::path> cache_dir;
        SleepFn sleep = real_sleep();
    };

    struct Stats {
        long requests = 0;
        long cache_hits = 0;
        long backend_calls = 0;  ///< attempts that reached a backend, mock or real
        long network_calls = 0;  ///< attempts that reached a remote backend
        long retries = 0;
    };

    explicit Gateway(Options options);

    void register_model(const std::string& model_id, std::shared_ptr<ChatBackend> backend);
    bool knows(const std::string& model_id) const;
    std::shared_ptr<ChatBackend> backend_for(const std::string& model_id) const;

    /// Returns the cached response when present, otherwise calls the backend and
    /// stores the result. Throws ConfigError for unknown models before any I/O and
    /// BackendError once retries are exhausted.
    ChatResponse complete(const ChatRequest& request);

    Stats stats() const;

private:
    Options options_;
    std::optional<ContentStore> cache_;
    mutable std::shared_mutex models_mu_;
    std::map<std::string, std::shared_ptr<ChatBackend>> models_;
    Semaphore in_flight_;
    std::atomic<long> requests_{0}, cache_hits_{0}, backend_calls_{0}, network_calls_{0}, retries_{0};
};

}  // namespace qstrum

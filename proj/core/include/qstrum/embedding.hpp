#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qstrum/content_store.hpp"
#include "qstrum/retry.hpp"

namespace qstrum {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    /// One vector per input text. Throw TransientBackendError for retryable failures.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
    virtual std::string id() const = 0;
    virtual bool remote() const { return false; }
};

/// Unit vector drawn from a generator seeded with the text's SHA-256 prefix.
EmbeddingVector mock_embedding(std::string_view text, std::size_t dim);

class MockEmbeddingBackend : public EmbeddingBackend {
public:
    explicit MockEmbeddingBackend(std::string id = "mock-embed", std::size_t dim = 64)
        : id_(std::move(id)), dim_(dim) {}

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::string id() const override { return id_; }

    long calls() const { return calls_.load(); }

private:
    std::string id_;
    std::size_t dim_;
    std::atomic<long> calls_{0};
};

/// Batches, de-duplicates and caches embedding requests by (model, text).
class Embedder {
public:
    struct Options {
        std::optional<std::filesystem::path> cache_dir;
        RetryPolicy retry;
        SleepFn sleep = real_sleep();
        std::size_t batch_size = 64;
    };

    struct Stats {
        long texts = 0;
        long cache_hits = 0;
        long backend_calls = 0;
        long network_calls = 0;
    };

    Embedder(std::shared_ptr<EmbeddingBackend> backend, Options options);

    /// Throws ConfigError on an empty batch, BackendError after retries.
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

    Stats stats() const;
    const std::string& model_id() const noexcept { return model_id_; }

private:
    std::string cache_key(const std::string& text) const;

    std::shared_ptr<EmbeddingBackend> backend_;
    Options options_;
    std::string model_id_;
    std::optional<ContentStore> disk_;
    mutable std::mutex mu_;
    std::unordered_map<std::string, EmbeddingVector> memory_;
    std::atomic<long> texts_{0}, cache_hits_{0}, backend_calls_{0}, network_calls_{0};
};

}  // namespace qstrum

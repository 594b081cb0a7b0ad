#include "qstrum/embedding.hpp"

#include <cmath>
#include <random>

#include "qstrum/errors.hpp"
#include "qstrum/hashing.hpp"

namespace qstrum {

EmbeddingVector mock_embedding(std::string_view text, std::size_t dim) {
    std::mt19937_64 gen(sha256_prefix64(text));
    EmbeddingVector v;
    v.values.resize(dim);
    double norm = 0.0;
    for (auto& x : v.values) {
        // 53 random bits mapped to [-1, 1); avoids implementation-defined distributions.
        x = static_cast<double>(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v.values) x /= norm;
    return v;
}

std::vector<EmbeddingVector> MockEmbeddingBackend::embed(std::span<const std::string> texts) {
    ++calls_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(mock_embedding(t, dim_));
    return out;
}

Embedder::Embedder(std::shared_ptr<EmbeddingBackend> backend, Options options)
    : backend_(std::move(backend)), options_(std::move(options)) {
    if (!backend_) throw ConfigError("embedder needs a backend");
    model_id_ = backend_->id();
    if (options_.cache_dir) disk_.emplace(*options_.cache_dir);
    if (options_.batch_size == 0) options_.batch_size = 1;
}

std::string Embedder::cache_key(const std::string& text) const {
    return sha256_hex(Json{{"model", model_id_}, {"text", text}}.dump(-1, ' ', false, Json::error_handler_t::replace));
}

std::vector<EmbeddingVector> Embedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ConfigError("embed called with no texts");
    texts_ += static_cast<long>(texts.size());

    std::vector<std::string> keys;
    keys.reserve(texts.size());
    std::vector<std::string> missing;  // unique texts not cached anywhere
    std::unordered_map<std::string, std::size_t> missing_pos;
    {
        std::lock_guard lock(mu_);
        for (const auto& text : texts) {
            keys.push_back(cache_key(text));
            const auto& key = keys.back();
            if (memory_.contains(key)) {
                ++cache_hits_;
                continue;
            }
            if (disk_) {
                if (auto stored = disk_->get(key)) {
                    memory_[key] = EmbeddingVector{stored->at("values").get<std::vector<double>>()};
                    ++cache_hits_;
                    continue;
                }
            }
            if (!missing_pos.contains(key)) {
                missing_pos[key] = missing.size();
                missing.push_back(text);
            }
        }
    }

    for (std::size_t start = 0; start < missing.size(); start += options_.batch_size) {
        const auto count = std::min(options_.batch_size, missing.size() - start);
        const std::span<const std::string> batch(missing.data() + start, count);
        auto vectors = call_with_retries(options_.retry, options_.sleep, [&] {
            ++backend_calls_;
            if (backend_->remote()) ++network_calls_;
            return backend_->embed(batch);
        });
        if (vectors.size() != count) {
            throw BackendError("embedding backend returned " + std::to_string(vectors.size()) + " vectors for " +
                                   std::to_string(count) + " texts",
                               1);
        }
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < count; ++i) {
            const auto key = cache_key(batch[i]);
            if (disk_) {
                disk_->put(key, Json{{"model", model_id_}, {"text", batch[i]}, {"values", vectors[i].values}});
            }
            memory_[key] = std::move(vectors[i]);
        }
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    std::lock_guard lock(mu_);
    std::size_t dim = 0;
    for (const auto& key : keys) {
        const auto& v = memory_.at(key);
        if (dim == 0) dim = v.dim();
        if (v.dim() != dim) throw NumericDomainError("embedding dimensions differ within one batch");
        out.push_back(v);
    }
    return out;
}

Embedder::Stats Embedder::stats() const {
    return Stats{texts_.load(), cache_hits_.load(), backend_calls_.load(), network_calls_.load()};
}

}  // namespace qstrum

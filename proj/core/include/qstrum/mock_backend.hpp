#pragma once

#include <atomic>
#include <map>
#include <mutex>
#include <string>

#include "qstrum/gateway.hpp"

namespace qstrum {

/// How the synthesized judge decides.
enum class MockJudgePolicy {
    honest,           ///< tie on identical explanations, otherwise more cited points wins
    first_position,   ///< always answers "A"
    second_position,  ///< always answers "B"
};

/// Offline backend. Registered fixtures are returned verbatim; anything else goes
/// to a rule-based synthesizer that reads the rendered prompt and emits
/// schema-valid output for the request tag's stage.
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(std::string id = "mock", MockJudgePolicy judge = MockJudgePolicy::honest);

    void register_fixture(const CacheKey& key, std::string response_text);

    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return id_; }

    long calls() const { return calls_.load(); }

private:
    std::string id_;
    MockJudgePolicy judge_;
    mutable std::mutex mu_;
    std::map<std::string, std::string> fixtures_;
    std::atomic<long> calls_{0};
};

/// Stage part of a request tag: "summary:base" -> "summary".
std::string_view stage_of_tag(std::string_view request_tag);

/// Deterministic synthesized completion for a rendered prompt.
std::string synthesize_response(const ChatRequest& request, MockJudgePolicy judge = MockJudgePolicy::honest);

/// Whitespace-separated word count, used as a token estimate by offline backends.
long approximate_tokens(std::string_view text);

}  // namespace qstrum

#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "qstrum/errors.hpp"

namespace qstrum {

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{2000};
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline SleepFn real_sleep() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

/// Delay before retry number `retry` (1-based): base * 2^(retry-1).
inline std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int retry) {
    return policy.backoff_base * (1LL << (retry - 1));
}

/// Runs `call` until it succeeds or the retry budget is spent. Only
/// TransientBackendError (including RateLimitError) is retried, each after an
/// exponential backoff. `on_retry` observes every retry.
template <class F>
auto call_with_retries(const RetryPolicy& policy, const SleepFn& sleep, F&& call,
                       const std::function<void()>& on_retry = {}) -> decltype(call()) {
    const int attempts = policy.max_retries + 1;
    std::string last_error;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        try {
            return call();
        } catch (const TransientBackendError& e) {
            last_error = e.what();
            if (attempt == attempts) break;
            if (sleep) sleep(backoff_delay(policy, attempt));
            if (on_retry) on_retry();
        }
    }
    throw BackendError(last_error, attempts);
}

}  // namespace qstrum

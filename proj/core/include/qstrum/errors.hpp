#pragma once

#include <stdexcept>
#include <string>

namespace qstrum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or missing configuration: unknown model id, invalid flag values, missing paths.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A prompt could not be rendered (missing variable, empty input, unknown tone).
class RenderError : public Error {
public:
    using Error::Error;
};

/// Artifact references an entity that is not among the supplied sources.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Cosine similarity on mismatched or zero vectors, rates over empty tallies, etc.
class NumericDomainError : public Error {
public:
    using Error::Error;
};

class JsonExtractError : public Error {
public:
    JsonExtractError(const std::string& what, std::string raw)
        : Error(what), raw_text_(std::move(raw)) {}

    const std::string& raw_text() const noexcept { return raw_text_; }

private:
    std::string raw_text_;
};

/// Backend failure after the retry budget was spent.
class BackendError : public Error {
public:
    BackendError(const std::string& what, int attempts)
        : Error(what + " (after " + std::to_string(attempts) + " attempts)"), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

/// Raised by backends for a single failed call; the gateway decides whether to retry.
class TransientBackendError : public Error {
public:
    using Error::Error;
};

/// HTTP 429 or equivalent. Triggers backoff before the retry is counted.
class RateLimitError : public TransientBackendError {
public:
    using TransientBackendError::TransientBackendError;
};

class StageError : public Error {
public:
    StageError(std::string query_id, std::string stage, std::string subject, int attempts,
               const std::string& detail)
        : Error("stage " + stage + " failed for query " + query_id +
                (subject.empty() ? std::string() : " (" + subject + ")") + " after " +
                std::to_string(attempts) + " attempts: " + detail),
          query_id_(std::move(query_id)),
          stage_(std::move(stage)),
          subject_(std::move(subject)),
          attempts_(attempts) {}

    const std::string& query_id() const noexcept { return query_id_; }
    const std::string& stage() const noexcept { return stage_; }
    /// Entity or aspect the stage was working on; empty for pair-level stages.
    const std::string& subject() const noexcept { return subject_; }
    int attempts() const noexcept { return attempts_; }

private:
    std::string query_id_;
    std::string stage_;
    std::string subject_;
    int attempts_;
};

class DatasetError : public Error {
public:
    DatasetError(const std::string& path, std::size_t line, const std::string& detail)
        : Error(path + ":" + std::to_string(line) + ": " + detail), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class ReportError : public Error {
public:
    using Error::Error;
};

}  // namespace qstrum

#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qstrum/embedding.hpp"
#include "qstrum/gateway.hpp"
#include "qstrum_app/config.hpp"

namespace qstrum::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

/// Gateway with the built-in mock models (mock, mock-judge, mock-judge-first,
/// mock-judge-second) plus every chat backend declared in the config.
std::unique_ptr<Gateway> make_gateway(const RunConfig& config, SleepFn sleep = real_sleep());

/// Backend for `config.embed_model`: mock-embed or a declared openai-embedding backend.
std::shared_ptr<EmbeddingBackend> make_embedding_backend(const RunConfig& config);

// Workspace layout under config.workspace:
//   dataset/snippets.jsonl, dataset/queries.jsonl   copied by ingest
//   ranked/<query_id>.json                          written by rank
//   runs/<run_id>/...                               written by run
//   reports/<dataset>.<run_x>_vs_<run_y>.<judge>.*  written by judge
std::filesystem::path dataset_dir(const RunConfig& config);
std::filesystem::path ranked_dir(const RunConfig& config);
std::filesystem::path runs_dir(const RunConfig& config);
std::filesystem::path reports_dir(const RunConfig& config);

/// Report column name for a run variant label ("debate-nice" -> "Debate (Nice)").
std::string method_label(std::string_view variant_label);

// Each command prints results to `out` and diagnostics to `err`, and returns an exit
// code. ConfigError propagates so the caller can map it to kExitConfig.

/// Validates the snippet and query files, copies them into the workspace and prints
/// the dataset summary.
int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Prints the dataset summary of the configured files, or of the ingested workspace copy.
int cmd_summarize_dataset(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Ranks entities for every query (or only `query_id`) and writes the selected pair.
int cmd_rank(const RunConfig& config, const std::optional<std::string>& query_id, std::ostream& out,
             std::ostream& err);

/// Runs the configured variant over every ranked query and writes the run directory.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Judges two runs against each other with every configured judge model.
int cmd_judge(const RunConfig& config, const std::string& run_x, const std::string& run_y,
              const std::optional<std::string>& label_x, const std::optional<std::string>& label_y,
              std::ostream& out, std::ostream& err);

/// Merges report JSON files into one Markdown table per judge model.
int cmd_report(std::span<const std::filesystem::path> files, const std::optional<std::filesystem::path>& output,
               std::ostream& out, std::ostream& err);

}  // namespace qstrum::app

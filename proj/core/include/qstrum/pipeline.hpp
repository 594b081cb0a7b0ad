#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qstrum/artifact_store.hpp"
#include "qstrum/domain.hpp"
#include "qstrum/gateway.hpp"
#include "qstrum/prompts.hpp"
#include "qstrum/retrieval.hpp"
#include "qstrum/validation.hpp"

namespace qstrum {

enum class VariantKind { base, contrastive, debate };

std::string_view to_string(VariantKind v);
VariantKind parse_variant_kind(std::string_view s);

/// Pipeline architecture. `tone` is meaningful only for debate; other kinds keep
/// Tone::standard.
struct Variant {
    VariantKind kind = VariantKind::base;
    Tone tone = Tone::standard;

    /// Throws ConfigError when a tone other than standard is given for a non-debate kind.
    static Variant make(VariantKind kind, Tone tone = Tone::standard);

    /// Directory name used in artifact paths: base, contrastive, debate, debate-nice, debate-aggressive.
    std::string label() const;
    static Variant parse_label(std::string_view label);

    bool operator==(const Variant&) const = default;
};

struct PipelineOptions {
    std::string model_id = "mock";
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
    Strictness strictness = Strictness::strict;
    int validation_retries = 2;  ///< extra attempts after a response fails validation
};

/// Token totals and validation warnings gathered while one query runs.
struct StageLog {
    TokenUsage tokens;
    std::vector<std::string> warnings;
};

struct DebateRound {
    std::string aspect;
    std::optional<DebateTranscript> transcript;
    std::optional<DebateSummary> summary;
    std::string error;  ///< set when this aspect failed

    bool operator==(const DebateRound&) const = default;
};

enum class RunStatus { complete, partial, failed };

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view s);

struct RunRecord {
    Query query;
    Variant variant;
    std::array<EntityRef, 2> pair;
    std::array<std::optional<AspectExtraction>, 2> extractions;
    std::optional<AspectMergeMap> merge_map;
    std::optional<FilteredAspects> filtered;
    std::vector<DebateRound> debates;  ///< debate variant only, in filtered aspect order
    std::optional<ContrastiveSummary> summary;
    TokenUsage tokens;
    std::vector<std::string> warnings;
    RunStatus status = RunStatus::failed;
    std::string error;

    bool operator==(const RunRecord&) const = default;
};

void to_json(Json& j, const Variant& v);
void from_json(const Json& j, Variant& v);
void to_json(Json& j, const DebateRound& v);
void from_json(const Json& j, DebateRound& v);
void to_json(Json& j, const RunRecord& v);
void from_json(const Json& j, RunRecord& v);

/// Concatenates the phrases of old aspects that map to the same new name. Output
/// order follows the first old aspect of each new name; phrases keep old-name order,
/// then phrase order. Throws Error when the map's domain differs from the aspect names.
AspectExtraction apply_merge_map(const AspectExtraction& extraction, const AspectMergeMap& map);

/// Runs the summarization stages through a gateway. Each stage renders its prompt, extracts
/// JSON, validates strictly and re-prompts with a corrective line on failure. After
/// the retry budget the last parsable response is coerced leniently and the
/// violations become warnings. Safe to use from several threads at once.
class Pipeline {
public:
    Pipeline(Gateway& gateway, PipelineOptions options, const ArtifactStore* store = nullptr);

    AspectExtraction run_aspect_extraction(const SnippetSet& entity, const Query& query, StageLog& log) const;
    AspectMergeMap run_aspect_merge(const AspectExtraction& a, const AspectExtraction& b, const Query& query,
                                    StageLog& log) const;
    FilteredAspects run_filter(const AspectExtraction& a, const AspectExtraction& b, const Query& query,
                               std::span<const SnippetSet> sources, StageLog& log) const;
    ContrastiveSummary run_summary(const FilteredAspects& filtered, const Query& query, SummaryFlavor flavor,
                                   std::span<const SnippetSet> sources, StageLog& log) const;
    DebateTranscript run_debate_transcript(const FilteredAspects& filtered, std::string_view aspect,
                                           const Query& query, Tone tone, StageLog& log) const;
    DebateSummary run_debate_summary(const FilteredAspects& filtered, const DebateTranscript& debate,
                                     const Query& query, std::span<const SnippetSet> sources, StageLog& log) const;
    /// Debate and debate summary for each filtered aspect. A failing aspect is
    /// recorded in its round and the others still run.
    std::vector<DebateRound> run_debate(const FilteredAspects& filtered, const Query& query, Tone tone,
                                        std::span<const SnippetSet> sources, StageLog& log) const;
    /// Final summary of the debate variant: the contrastive prompt with each
    /// entity's attributes replaced by its per-aspect debate-summary texts.
    ContrastiveSummary run_debate_final_summary(const std::vector<DebateRound>& rounds, const Query& query,
                                                std::span<const SnippetSet> sources, StageLog& log) const;

    /// Full variant for one query. Stage errors are caught and reflected in the
    /// record's status; artifacts are persisted when a store is attached.
    RunRecord run_variant(const Query& query, const std::array<SnippetSet, 2>& pair, const Variant& variant) const;

    const PipelineOptions& options() const noexcept { return options_; }

private:
    ChatResponse call(const std::string& prompt, const std::string& tag, StageLog& log) const;

    Gateway& gateway_;
    PipelineOptions options_;
    const ArtifactStore* store_;
};

/// Runs `variant` over every ranked query with up to `parallel` queries in flight.
/// Results keep input order regardless of completion order.
std::vector<RunRecord> run_batch(const Pipeline& pipeline, std::span<const RankedQuery> queries,
                                 const Variant& variant, std::size_t parallel = 1);

/// Manifest contents: config snapshot, template hashes, model ids and token totals.
Json build_manifest(const Json& config, const PipelineOptions& options, const Variant& variant,
                    std::span<const RunRecord> records);

}  // namespace qstrum

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qstrum/domain.hpp"

namespace qstrum {

enum class Strictness { strict, lenient };

std::string_view to_string(Strictness s);
Strictness parse_strictness(std::string_view s);

/// Result of checking a parsed model output against a stage's schema.
///
/// In strict mode `value` is set only when there are no violations. In lenient mode
/// the output is coerced (extra items truncated, shortfalls accepted) and `degraded`
/// records that coercion happened. A `fatal` result (missing entity keys, wrong JSON
/// shapes) carries no value in either mode.
template <class T>
struct Validated {
    std::optional<T> value;
    std::vector<std::string> violations;
    bool degraded = false;
    bool fatal = false;

    bool ok() const { return value.has_value() && violations.empty(); }
};

Validated<AspectExtraction> validate_extraction(const Json& output, const EntityRef& entity,
                                                Strictness strictness);

/// `a` and `b` are the two entities' extractions; the map's domain must equal their aspect names.
Validated<AspectMergeMap> validate_merge_map(const Json& output, const AspectExtraction& a,
                                             const AspectExtraction& b, Strictness strictness);

Validated<FilteredAspects> validate_filtered(const Json& output, const EntityRef& a, const EntityRef& b,
                                             Strictness strictness);

Validated<ContrastiveSummary> validate_summary(const Json& output, const EntityRef& a, const EntityRef& b,
                                               Strictness strictness);

Validated<DebateSummary> validate_debate_summary(const Json& output, std::string_view aspect,
                                                 const EntityRef& a, const EntityRef& b,
                                                 Strictness strictness);

/// True for attribute names that carry no meaning ("null", "N/A", "none", ...).
bool is_null_like_name(std::string_view name);

/// True when text names a debate participant ("Alice" or "Bob" as whole words).
bool mentions_debaters(std::string_view text);

// ---- stage dispatch ---------------------------------------------------------

enum class StageTag { aspect_extraction, aspect_merge, filter, summary, debate_summary };

std::string_view to_string(StageTag s);

/// Everything a stage validator needs beyond the model output itself.
struct StageContext {
    StageTag stage = StageTag::aspect_extraction;
    EntityRef first;
    EntityRef second;                                ///< unused for aspect_extraction
    const AspectExtraction* extraction_a = nullptr;  ///< aspect_merge only
    const AspectExtraction* extraction_b = nullptr;
    std::string aspect;                              ///< debate_summary only
};

using StageArtifact =
    std::variant<AspectExtraction, AspectMergeMap, FilteredAspects, ContrastiveSummary, DebateSummary>;

Validated<StageArtifact> validate_stage_schema(const Json& output, const StageContext& context,
                                               Strictness strictness);

// ---- citations ----------------------------------------------------------------

struct CitationViolation {
    std::string entity_id;
    std::string aspect;
    std::string phrase;
    int index = 0;

    std::string describe() const;
    bool operator==(const CitationViolation&) const = default;
};

// Every overload throws StructuralError when the artifact names an entity that is
// not in `sources`; out-of-range indices are reported as violations instead.
std::vector<CitationViolation> validate_citations(const EntityAspects& artifact,
                                                  std::span<const SnippetSet> sources);
std::vector<CitationViolation> validate_citations(const FilteredAspects& artifact,
                                                  std::span<const SnippetSet> sources);
std::vector<CitationViolation> validate_citations(const ContrastiveSummary& artifact,
                                                  std::span<const SnippetSet> sources);
std::vector<CitationViolation> validate_citations(const DebateSummary& artifact,
                                                  std::span<const SnippetSet> sources);

}  // namespace qstrum

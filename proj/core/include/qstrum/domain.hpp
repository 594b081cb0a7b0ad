#pragma once

// Core data model shared by every pipeline stage and the evaluation harness.
//
// All artifacts serialize to nlohmann::ordered_json with a fixed field order, so
// serialize -> parse -> serialize is byte-identical. Aspect and entity order is
// significant (it is the order the model emitted, or the order of the pair) and
// is carried by vectors rather than maps.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace qstrum {

using Json = nlohmann::ordered_json;

enum class DomainLabel { destination, restaurant, hotel };
enum class Tone { standard, nice, aggressive };
enum class Criterion { contrast, relevancy, diversity, usefulness };
/// Outcome of one judgment expressed in method space: `a` is method_a regardless of
/// the order the summaries were shown in.
enum class Winner { a, b, tie };
enum class JudgeOrder { ab, ba };

inline constexpr std::array<Criterion, 4> kCriteria = {
    Criterion::contrast, Criterion::relevancy, Criterion::diversity, Criterion::usefulness};

std::string_view to_string(DomainLabel v);
std::string_view to_string(Tone v);
std::string_view to_string(Criterion v);
std::string_view to_string(Winner v);
std::string_view to_string(JudgeOrder v);

// Parsers throw qstrum::Error on anything outside the closed set.
DomainLabel parse_domain_label(std::string_view s);
Tone parse_tone(std::string_view s);
Criterion parse_criterion(std::string_view s);
Winner parse_winner(std::string_view s);
JudgeOrder parse_judge_order(std::string_view s);

/// Row label used in report tables ("Relevance" for the relevancy criterion).
std::string_view report_label(Criterion c);

struct Query {
    std::string id;
    std::string text;
    std::optional<std::string> expanded_text;
    DomainLabel domain_label = DomainLabel::destination;

    bool operator==(const Query&) const = default;
};

struct Snippet {
    std::string entity_id;
    int index = 0;  ///< 1-based position within the owning SnippetSet
    std::string text;

    bool operator==(const Snippet&) const = default;
};

inline constexpr std::size_t kDefaultSnippetCap = 50;

struct SnippetSet {
    std::string entity_id;
    std::string entity_name;
    std::vector<Snippet> snippets;

    bool operator==(const SnippetSet&) const = default;
};

/// Returns a description of the first SnippetSet invariant that fails, or nullopt.
std::optional<std::string> check_snippet_set(const SnippetSet& set, std::size_t cap = kDefaultSnippetCap);

/// A phrase as emitted by the model, with its `[n]` citations parsed out.
/// `text` keeps the markers so it can be fed back into later prompts unchanged.
struct CitedPhrase {
    std::string text;
    std::vector<int> citations;

    static CitedPhrase from_text(std::string text);
    bool operator==(const CitedPhrase&) const = default;
};

struct Aspect {
    std::string name;
    std::vector<CitedPhrase> phrases;

    bool operator==(const Aspect&) const = default;
};

struct EntityRef {
    std::string id;
    std::string name;

    bool operator==(const EntityRef&) const = default;
};

/// An entity together with an ordered list of named aspects.
struct EntityAspects {
    EntityRef entity;
    std::vector<Aspect> aspects;

    const Aspect* find(std::string_view aspect_name) const;
    std::vector<std::string> aspect_names() const;
    bool operator==(const EntityAspects&) const = default;
};

inline constexpr std::size_t kExtractionAspects = 5;
inline constexpr std::size_t kExtractionMinPhrases = 10;
inline constexpr std::size_t kFilteredAspects = 3;
inline constexpr std::size_t kFilteredPhrases = 10;
inline constexpr std::size_t kSummaryAttributes = 3;
inline constexpr std::size_t kSummaryBullets = 3;
inline constexpr std::size_t kDebateSummaryMinCitations = 5;

/// Per-entity output of the aspect extraction stage.
struct AspectExtraction : EntityAspects {};

struct AspectMergeMap {
    struct EntityMap {
        EntityRef entity;
        std::vector<std::pair<std::string, std::string>> renames;  ///< old -> new, in old-name order

        std::optional<std::string> lookup(std::string_view old_name) const;
        bool operator==(const EntityMap&) const = default;
    };
    std::array<EntityMap, 2> entities;

    bool operator==(const AspectMergeMap&) const = default;
};

/// Three aspects x ten phrases per entity, identical aspect names across the pair.
struct FilteredAspects {
    std::array<EntityAspects, 2> entities;

    bool operator==(const FilteredAspects&) const = default;
};

/// Final output: three attributes x three cited bullets per entity.
struct ContrastiveSummary {
    std::array<EntityAspects, 2> entities;

    bool operator==(const ContrastiveSummary&) const = default;
};

struct DebateTranscript {
    std::string query_id;
    std::string aspect_name;
    std::array<std::string, 2> entity_ids;
    Tone tone = Tone::standard;
    std::string text;

    bool operator==(const DebateTranscript&) const = default;
};

struct DebateSummary {
    struct EntityText {
        EntityRef entity;
        std::string text;

        bool operator==(const EntityText&) const = default;
    };
    std::string aspect_name;
    std::array<EntityText, 2> entities;

    bool operator==(const DebateSummary&) const = default;
};

struct JudgeVerdict {
    std::string query_id;
    Criterion criterion = Criterion::contrast;
    Winner winner = Winner::tie;
    std::string raw_label;  ///< label as written by the judge, before any order swap
    std::string explanation;
    JudgeOrder order = JudgeOrder::ab;

    bool operator==(const JudgeVerdict&) const = default;
};

struct CriterionRate {
    Criterion criterion = Criterion::contrast;
    long wins = 0;
    long losses = 0;
    long ties = 0;
    long missing = 0;  ///< failed judgments, excluded from the denominator
    double win_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;

    long total() const { return wins + losses + ties; }
    bool operator==(const CriterionRate&) const = default;
};

struct WinRateReport {
    std::string dataset;
    std::string judge_model;
    std::string method_a;
    std::string method_b;
    long queries = 0;
    int bootstrap_iterations = 0;
    std::uint64_t seed = 0;
    std::vector<CriterionRate> criteria;

    const CriterionRate* find(Criterion c) const;
    bool operator==(const WinRateReport&) const = default;
};

/// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Member of `object` whose trimmed key equals the trimmed `name` (case-sensitive).
const Json* find_entity_key(const Json& object, std::string_view name);

/// Two-space indented JSON with a trailing newline; invalid UTF-8 is replaced.
std::string canonical_dump(const Json& j);

// ---- serialization -------------------------------------------------------

void to_json(Json& j, const Query& v);
void from_json(const Json& j, Query& v);
void to_json(Json& j, const Snippet& v);
void from_json(const Json& j, Snippet& v);
void to_json(Json& j, const SnippetSet& v);
void from_json(const Json& j, SnippetSet& v);
void to_json(Json& j, const CitedPhrase& v);
void from_json(const Json& j, CitedPhrase& v);
void to_json(Json& j, const EntityRef& v);
void from_json(const Json& j, EntityRef& v);
void to_json(Json& j, const EntityAspects& v);
void from_json(const Json& j, EntityAspects& v);
void to_json(Json& j, const AspectExtraction& v);
void from_json(const Json& j, AspectExtraction& v);
void to_json(Json& j, const AspectMergeMap& v);
void from_json(const Json& j, AspectMergeMap& v);
void to_json(Json& j, const FilteredAspects& v);
void from_json(const Json& j, FilteredAspects& v);
void to_json(Json& j, const ContrastiveSummary& v);
void from_json(const Json& j, ContrastiveSummary& v);
void to_json(Json& j, const DebateTranscript& v);
void from_json(const Json& j, DebateTranscript& v);
void to_json(Json& j, const DebateSummary& v);
void from_json(const Json& j, DebateSummary& v);
void to_json(Json& j, const JudgeVerdict& v);
void from_json(const Json& j, JudgeVerdict& v);
void to_json(Json& j, const CriterionRate& v);
void from_json(const Json& j, CriterionRate& v);
void to_json(Json& j, const WinRateReport& v);
void from_json(const Json& j, WinRateReport& v);

}  // namespace qstrum

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qstrum/bootstrap.hpp"
#include "qstrum/domain.hpp"
#include "qstrum/gateway.hpp"
#include "qstrum/pipeline.hpp"

namespace qstrum {

struct ComparisonTask {
    Query query;
    std::string method_a;
    std::string method_b;
    std::string summary_a;
    std::string summary_b;
    std::string judge_model;
};

struct JudgeOptions {
    double temperature = kDefaultTemperature;
    int max_tokens = kDefaultMaxTokens;
    int retries = 2;  ///< extra attempts when the judge's JSON is unusable
};

/// Criteria a judge response could not settle, with the reason.
struct MissingJudgment {
    std::string query_id;
    JudgeOrder order = JudgeOrder::ab;
    Criterion criterion = Criterion::contrast;
    std::string reason;

    bool operator==(const MissingJudgment&) const = default;
};

struct DirectionJudgment {
    JudgeOrder order = JudgeOrder::ab;
    std::vector<JudgeVerdict> verdicts;  ///< in criterion order, winners already in method space
    std::vector<MissingJudgment> missing;
};

struct PairJudgment {
    std::string query_id;
    std::array<DirectionJudgment, 2> directions;  ///< AB then BA
};

/// Method-space winner for a label written by the judge. In BA order the judge saw
/// method_b as "A", so the label is swapped back. Returns nullopt for anything
/// outside {A, B, tie} (case-insensitive, trimmed).
std::optional<Winner> winner_from_label(std::string_view label, JudgeOrder order);

/// Parses one judge response. Criteria with an invalid winner or an empty
/// explanation are reported as missing.
DirectionJudgment parse_judge_response(const Json& response, const std::string& query_id, JudgeOrder order);

/// Renders the judge prompt in both orders and parses the answers. A direction whose
/// response never yields JSON is recorded as missing for every criterion.
PairJudgment judge_pair(Gateway& gateway, const ComparisonTask& task, const JudgeOptions& options = {});

struct CriterionTally {
    Criterion criterion = Criterion::contrast;
    long wins_a = 0;
    long wins_b = 0;
    long ties = 0;
    long missing = 0;

    long total() const { return wins_a + wins_b + ties; }
    bool operator==(const CriterionTally&) const = default;
};

/// (wins_side + 0.5 ties) / total. `side` must be Winner::a or Winner::b.
/// Throws NumericDomainError when total is 0.
double compute_win_rate(const CriterionTally& tally, Winner side);

/// Folds verdicts into per-criterion tallies, in kCriteria order.
std::array<CriterionTally, 4> tally_verdicts(std::span<const JudgeVerdict> verdicts,
                                             std::span<const MissingJudgment> missing = {});

/// Per-query resampling units for one criterion, counted from method_a's side.
std::vector<OutcomeUnit> outcome_units(std::span<const JudgeVerdict> verdicts, Criterion criterion);

struct ComparisonOptions {
    std::string dataset;
    std::string method_a;
    std::string method_b;
    std::vector<std::string> judge_models;
    JudgeOptions judge;
    int bootstrap_iterations = kDefaultBootstrapIterations;
    double confidence_level = kDefaultConfidenceLevel;
    std::uint64_t seed = 0;
    std::size_t parallel = 1;
};

struct ComparisonResult {
    WinRateReport report;
    std::vector<JudgeVerdict> verdicts;  ///< sorted by (query_id, order, criterion)
    std::vector<MissingJudgment> missing;
};

/// Text handed to the judge for one run record: the final summary as two-space JSON.
std::string judged_text(const RunRecord& record);

/// Judges every shared query of two runs with each judge model. Throws
/// EvaluationError when the query sets differ (listing the ids) or a label is empty.
/// Records without a final summary contribute missing judgments.
std::vector<ComparisonResult> compare_runs(Gateway& gateway, std::span<const RunRecord> run_x,
                                           std::span<const RunRecord> run_y, const ComparisonOptions& options);

/// WinRateReport for already-collected verdicts.
WinRateReport build_report(std::span<const JudgeVerdict> verdicts, std::span<const MissingJudgment> missing,
                           const ComparisonOptions& options, const std::string& judge_model, long queries);

void to_json(Json& j, const MissingJudgment& v);
void from_json(const Json& j, MissingJudgment& v);

}  // namespace qstrum

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qstrum/domain.hpp"
#include "qstrum/evaluation.hpp"

namespace qstrum {

/// "0.85 [0.78, 0.91]" with two decimals.
std::string format_rate(double rate, double low, double high);

/// format_rate for one criterion, or "n/a" when it has no judgments.
std::string format_cell(const CriterionRate& rate);

/// Column header of a comparison: "<dataset>: <method_a> vs. <method_b>".
std::string column_label(const WinRateReport& report);

/// One comparison as CSV: header `Criterion,<column>`, one row per criterion.
std::string report_csv(const WinRateReport& report);

/// One comparison as a Markdown table with the same layout as the CSV.
std::string report_markdown(const WinRateReport& report);

/// One JSON object per line: every verdict, then every missing judgment.
std::string verdict_log(std::span<const JudgeVerdict> verdicts, std::span<const MissingJudgment> missing);

struct ReportPaths {
    std::filesystem::path json;
    std::filesystem::path csv;
    std::filesystem::path markdown;
    std::filesystem::path verdicts;
};

/// Writes `<stem>.json`, `<stem>.csv`, `<stem>.md` and `<stem>.verdicts.jsonl` under `dir`.
ReportPaths write_report(const std::filesystem::path& dir, const std::string& stem, const ComparisonResult& result);

/// Reads a report JSON file. Throws ReportError naming the path when it is unreadable or malformed.
WinRateReport load_report(const std::filesystem::path& path);

/// Consolidated Markdown: one table per judge model (in first-seen order), one
/// column per (dataset, method_a, method_b), rows Contrast/Relevance/Diversity/Usefulness.
/// Identical duplicates are merged; two reports for the same column that disagree
/// raise ReportError.
std::string merge_reports(std::span<const WinRateReport> reports);

}  // namespace qstrum

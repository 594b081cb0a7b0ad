#include "qstrum/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "qstrum/content_store.hpp"
#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_field(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

const CriterionRate& rate_for(const WinRateReport& report, Criterion c) {
    const auto* rate = report.find(c);
    if (rate == nullptr) {
        throw ReportError("report " + column_label(report) + " has no " + std::string(to_string(c)) + " row");
    }
    return *rate;
}

std::string markdown_table(const std::vector<const WinRateReport*>& columns) {
    std::ostringstream out;
    out << "| Criterion |";
    for (const auto* r : columns) out << ' ' << md_field(column_label(*r)) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
    out << '\n';
    for (auto c : kCriteria) {
        out << "| " << report_label(c) << " |";
        for (const auto* r : columns) out << ' ' << format_cell(rate_for(*r, c)) << " |";
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string format_rate(double rate, double low, double high) {
    return fixed2(rate) + " [" + fixed2(low) + ", " + fixed2(high) + "]";
}

std::string format_cell(const CriterionRate& rate) {
    if (rate.total() == 0) return "n/a";
    return format_rate(rate.win_rate, rate.ci_low, rate.ci_high);
}

std::string column_label(const WinRateReport& report) {
    return report.dataset + ": " + report.method_a + " vs. " + report.method_b;
}

std::string report_csv(const WinRateReport& report) {
    std::string out = "Criterion," + csv_field(column_label(report)) + "\n";
    for (auto c : kCriteria) out += std::string(report_label(c)) + "," + csv_field(format_cell(rate_for(report, c))) + "\n";
    return out;
}

std::string report_markdown(const WinRateReport& report) {
    return "Judge: " + md_field(report.judge_model) + "\n\n" + markdown_table({&report});
}

std::string verdict_log(std::span<const JudgeVerdict> verdicts, std::span<const MissingJudgment> missing) {
    std::string out;
    for (const auto& v : verdicts) out += Json(v).dump() + "\n";
    for (const auto& m : missing) {
        Json j = m;
        j["missing"] = true;
        out += j.dump() + "\n";
    }
    return out;
}

ReportPaths write_report(const std::filesystem::path& dir, const std::string& stem, const ComparisonResult& result) {
    ReportPaths paths{dir / (stem + ".json"), dir / (stem + ".csv"), dir / (stem + ".md"),
                      dir / (stem + ".verdicts.jsonl")};
    write_file_atomic(paths.json, canonical_dump(Json(result.report)));
    write_file_atomic(paths.csv, report_csv(result.report));
    write_file_atomic(paths.markdown, report_markdown(result.report));
    write_file_atomic(paths.verdicts, verdict_log(result.verdicts, result.missing));
    return paths;
}

WinRateReport load_report(const std::filesystem::path& path) {
    try {
        auto report = Json::parse(read_file(path)).get<WinRateReport>();
        for (auto c : kCriteria) rate_for(report, c);
        return report;
    } catch (const ReportError& e) {
        throw ReportError(path.string() + ": " + e.what());
    } catch (const std::exception& e) {
        throw ReportError(path.string() + ": malformed report: " + e.what());
    }
}

std::string merge_reports(std::span<const WinRateReport> reports) {
    if (reports.empty()) throw ReportError("no reports to merge");
    std::vector<std::string> judges;
    std::vector<std::vector<const WinRateReport*>> columns;
    for (const auto& r : reports) {
        auto it = std::find(judges.begin(), judges.end(), r.judge_model);
        if (it == judges.end()) {
            judges.push_back(r.judge_model);
            columns.emplace_back();
            it = judges.end() - 1;
        }
        auto& cols = columns[static_cast<std::size_t>(it - judges.begin())];
        const auto label = column_label(r);
        const auto dup = std::find_if(cols.begin(), cols.end(), [&](const WinRateReport* c) { return column_label(*c) == label; });
        if (dup == cols.end()) {
            cols.push_back(&r);
        } else if (!(**dup == r)) {
            throw ReportError("conflicting reports for '" + label + "' judged by " + r.judge_model);
        }
    }
    std::string out;
    for (std::size_t i = 0; i < judges.size(); ++i) {
        if (i > 0) out += '\n';
        out += "Judge: " + md_field(judges[i]) + "\n\n" + markdown_table(columns[i]);
    }
    return out;
}

}  // namespace qstrum

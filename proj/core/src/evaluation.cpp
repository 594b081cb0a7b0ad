#include "qstrum/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <set>
#include <thread>

#include "qstrum/errors.hpp"
#include "qstrum/json_extract.hpp"
#include "qstrum/prompts.hpp"

namespace qstrum {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::size_t criterion_index(Criterion c) {
    return static_cast<std::size_t>(std::find(kCriteria.begin(), kCriteria.end(), c) - kCriteria.begin());
}

DirectionJudgment all_missing(const std::string& query_id, JudgeOrder order, const std::string& reason) {
    DirectionJudgment d{order, {}, {}};
    for (auto c : kCriteria) d.missing.push_back(MissingJudgment{query_id, order, c, reason});
    return d;
}

std::string list_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ", ";
        out += id;
    }
    return out;
}

}  // namespace

std::optional<Winner> winner_from_label(std::string_view label, JudgeOrder order) {
    const auto l = lower(trim(label));
    if (l == "tie") return Winner::tie;
    if (l == "a") return order == JudgeOrder::ab ? Winner::a : Winner::b;
    if (l == "b") return order == JudgeOrder::ab ? Winner::b : Winner::a;
    return std::nullopt;
}

DirectionJudgment parse_judge_response(const Json& response, const std::string& query_id, JudgeOrder order) {
    if (!response.is_object()) return all_missing(query_id, order, "judge response is not a JSON object");
    DirectionJudgment d{order, {}, {}};
    for (auto c : kCriteria) {
        const std::string key(to_string(c));
        auto missing = [&](std::string reason) { d.missing.push_back(MissingJudgment{query_id, order, c, std::move(reason)}); };
        if (!response.contains(key) || !response.at(key).is_string()) {
            missing("no winner for " + key);
            continue;
        }
        const auto label = response.at(key).get<std::string>();
        const auto winner = winner_from_label(label, order);
        if (!winner) {
            missing("invalid winner '" + label + "' for " + key);
            continue;
        }
        const auto ekey = key + "_explanation";
        std::string explanation;
        if (response.contains(ekey) && response.at(ekey).is_string()) explanation = std::string(trim(response.at(ekey).get<std::string>()));
        if (explanation.empty()) {
            missing("no explanation for " + key);
            continue;
        }
        d.verdicts.push_back(JudgeVerdict{query_id, c, *winner, label, explanation, order});
    }
    return d;
}

PairJudgment judge_pair(Gateway& gateway, const ComparisonTask& task, const JudgeOptions& options) {
    if (task.summary_a.empty() || task.summary_b.empty()) throw EvaluationError("empty summary for query " + task.query.id);
    if (task.method_a == task.method_b) throw EvaluationError("method labels must differ");
    PairJudgment out{task.query.id, {}};
    const auto domain = std::string(to_string(task.query.domain_label));
    const int attempts = 1 + std::max(0, options.retries);
    for (auto order : {JudgeOrder::ab, JudgeOrder::ba}) {
        const bool ab = order == JudgeOrder::ab;
        const auto prompt = render_judge(task.query, ab ? task.summary_a : task.summary_b,
                                         ab ? task.summary_b : task.summary_a, domain);
        const auto tag = "judge:" + task.query.id + ":" + std::string(to_string(order));
        std::optional<DirectionJudgment> best;
        std::string last_problem;
        for (int attempt = 0; attempt < attempts; ++attempt) {
            std::string suffix;
            if (attempt > 0) suffix = "\n\nYour previous answer was rejected: " + last_problem + ". Reply again with the JSON only.";
            const auto response = gateway.complete(
                ChatRequest{task.judge_model, prompt + suffix, options.temperature, options.max_tokens, tag});
            DirectionJudgment parsed;
            try {
                parsed = parse_judge_response(extract_json(response.text), task.query.id, order);
            } catch (const JsonExtractError&) {
                last_problem = "response contained no JSON object";
                continue;
            }
            if (!best || parsed.missing.size() < best->missing.size()) best = parsed;
            if (best->missing.empty()) break;
            last_problem = best->missing.front().reason;
        }
        out.directions[ab ? 0 : 1] = best ? std::move(*best) : all_missing(task.query.id, order, last_problem);
    }
    return out;
}

double compute_win_rate(const CriterionTally& tally, Winner side) {
    if (side == Winner::tie) throw Error("win rate side must be a or b");
    if (tally.total() == 0) throw NumericDomainError("win rate is undefined for an empty tally");
    const auto wins = side == Winner::a ? tally.wins_a : tally.wins_b;
    return (static_cast<double>(wins) + 0.5 * static_cast<double>(tally.ties)) / static_cast<double>(tally.total());
}

std::array<CriterionTally, 4> tally_verdicts(std::span<const JudgeVerdict> verdicts,
                                             std::span<const MissingJudgment> missing) {
    std::array<CriterionTally, 4> tallies;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) tallies[i].criterion = kCriteria[i];
    for (const auto& v : verdicts) {
        auto& t = tallies[criterion_index(v.criterion)];
        switch (v.winner) {
            case Winner::a: ++t.wins_a; break;
            case Winner::b: ++t.wins_b; break;
            case Winner::tie: ++t.ties; break;
        }
    }
    for (const auto& m : missing) ++tallies[criterion_index(m.criterion)].missing;
    return tallies;
}

std::vector<OutcomeUnit> outcome_units(std::span<const JudgeVerdict> verdicts, Criterion criterion) {
    std::vector<std::string> order;
    std::vector<OutcomeUnit> units;
    for (const auto& v : verdicts) {
        if (v.criterion != criterion) continue;
        auto it = std::find(order.begin(), order.end(), v.query_id);
        if (it == order.end()) {
            order.push_back(v.query_id);
            units.emplace_back();
            it = order.end() - 1;
        }
        auto& u = units[static_cast<std::size_t>(it - order.begin())];
        switch (v.winner) {
            case Winner::a: ++u.wins; break;
            case Winner::b: ++u.losses; break;
            case Winner::tie: ++u.ties; break;
        }
    }
    return units;
}

std::string judged_text(const RunRecord& record) {
    if (!record.summary) throw EvaluationError("query " + record.query.id + " has no final summary");
    return Json(*record.summary).dump(2);
}

WinRateReport build_report(std::span<const JudgeVerdict> verdicts, std::span<const MissingJudgment> missing,
                           const ComparisonOptions& options, const std::string& judge_model, long queries) {
    WinRateReport report{options.dataset, judge_model, options.method_a, options.method_b, queries,
                         options.bootstrap_iterations, options.seed, {}};
    const auto tallies = tally_verdicts(verdicts, missing);
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        const auto& t = tallies[i];
        CriterionRate rate{t.criterion, t.wins_a, t.wins_b, t.ties, t.missing, 0.0, 0.0, 0.0};
        if (t.total() > 0) {
            rate.win_rate = compute_win_rate(t, Winner::a);
            const auto units = outcome_units(verdicts, t.criterion);
            const auto ci = bootstrap_ci(units, options.bootstrap_iterations, options.confidence_level, options.seed + i);
            // Percentile endpoints can miss the point estimate by interpolation error; keep it inside.
            rate.ci_low = std::min(ci.low, rate.win_rate);
            rate.ci_high = std::max(ci.high, rate.win_rate);
        }
        report.criteria.push_back(rate);
    }
    return report;
}

std::vector<ComparisonResult> compare_runs(Gateway& gateway, std::span<const RunRecord> run_x,
                                           std::span<const RunRecord> run_y, const ComparisonOptions& options) {
    if (options.method_a.empty() || options.method_b.empty() || options.method_a == options.method_b) {
        throw EvaluationError("method labels must be non-empty and distinct");
    }
    if (options.judge_models.empty()) throw EvaluationError("no judge model configured");
    for (const auto& m : options.judge_models) {
        if (!gateway.knows(m)) throw ConfigError("unknown judge model '" + m + "'");
    }

    std::map<std::string, const RunRecord*> xs, ys;
    for (const auto& r : run_x) xs[r.query.id] = &r;
    for (const auto& r : run_y) ys[r.query.id] = &r;
    std::vector<std::string> only_x, only_y;
    for (const auto& [id, r] : xs) {
        if (!ys.contains(id)) only_x.push_back(id);
    }
    for (const auto& [id, r] : ys) {
        if (!xs.contains(id)) only_y.push_back(id);
    }
    if (!only_x.empty() || !only_y.empty()) {
        std::string msg = "query sets differ;";
        if (!only_y.empty()) msg += " missing from " + options.method_a + ": " + list_ids(only_y) + ";";
        if (!only_x.empty()) msg += " missing from " + options.method_b + ": " + list_ids(only_x) + ";";
        msg.pop_back();
        throw EvaluationError(msg);
    }
    if (xs.empty()) throw EvaluationError("no queries to compare");

    std::vector<std::string> ids;
    for (const auto& [id, r] : xs) ids.push_back(id);

    std::vector<ComparisonResult> results;
    for (const auto& judge : options.judge_models) {
        std::vector<PairJudgment> judged(ids.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < ids.size(); i = next++) {
                const auto& x = *xs.at(ids[i]);
                const auto& y = *ys.at(ids[i]);
                if (!x.summary || !y.summary) {
                    const auto reason = std::string("no final summary in ") + (!x.summary ? options.method_a : options.method_b);
                    judged[i] = PairJudgment{ids[i], {all_missing(ids[i], JudgeOrder::ab, reason),
                                                      all_missing(ids[i], JudgeOrder::ba, reason)}};
                    continue;
                }
                ComparisonTask task{x.query, options.method_a, options.method_b, judged_text(x), judged_text(y), judge};
                judged[i] = judge_pair(gateway, task, options.judge);
            }
        };
        const auto n = std::clamp<std::size_t>(options.parallel, 1, ids.size());
        if (n == 1) {
            worker();
        } else {
            std::vector<std::jthread> threads;
            for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
        }

        // ids are sorted and each PairJudgment holds AB then BA, so this reduction
        // visits verdicts in (query_id, order, criterion) order.
        ComparisonResult result;
        for (const auto& pair : judged) {
            for (const auto& d : pair.directions) {
                result.verdicts.insert(result.verdicts.end(), d.verdicts.begin(), d.verdicts.end());
                result.missing.insert(result.missing.end(), d.missing.begin(), d.missing.end());
            }
        }
        result.report = build_report(result.verdicts, result.missing, options, judge, static_cast<long>(ids.size()));
        results.push_back(std::move(result));
    }
    return results;
}

void to_json(Json& j, const MissingJudgment& v) {
    j = Json{{"query_id", v.query_id},
             {"order", to_string(v.order)},
             {"criterion", to_string(v.criterion)},
             {"reason", v.reason}};
}

void from_json(const Json& j, MissingJudgment& v) {
    v.query_id = j.at("query_id").get<std::string>();
    v.order = parse_judge_order(j.at("order").get<std::string>());
    v.criterion = parse_criterion(j.at("criterion").get<std::string>());
    v.reason = j.at("reason").get<std::string>();
}

}  // namespace qstrum

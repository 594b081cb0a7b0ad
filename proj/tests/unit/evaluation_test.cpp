#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "qstrum/errors.hpp"
#include "qstrum/evaluation.hpp"
#include "test_support.hpp"

namespace qstrum {
namespace {

class JudgeBackend : public ChatBackend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit JudgeBackend(Fn fn) : fn_(std::move(fn)) {}
    ChatResponse complete(const ChatRequest& r) override {
        ++calls;
        return ChatResponse{fn_(r), {}, false, "judge"};
    }
    std::string id() const override { return "judge"; }
    std::atomic<int> calls{0};

private:
    Fn fn_;
};

std::string all_criteria(const std::string& label, const std::string& why = "because") {
    Json j = Json::object();
    for (auto c : kCriteria) {
        j[std::string(to_string(c))] = label;
        j[std::string(to_string(c)) + "_explanation"] = why;
    }
    return j.dump();
}

std::string explanation_a(const std::string& prompt) {
    const auto s = prompt.find("Explanation A:\n");
    const auto e = prompt.find("Explanation B:\n");
    return prompt.substr(s, e - s);
}

RunRecord record(const std::string& qid, const std::string& marker, int bullets = 3) {
    RunRecord r;
    r.query = testing::make_query(qid, "quiet places");
    r.variant = Variant::make(VariantKind::base);
    r.pair = {EntityRef{"e1", "One"}, EntityRef{"e2", "Two"}};
    ContrastiveSummary s;
    for (std::size_t i = 0; i < 2; ++i) {
        s.entities[i].entity = r.pair[i];
        Aspect a{"calm", {}};
        for (int b = 0; b < bullets; ++b) a.phrases.push_back(CitedPhrase::from_text(marker + " [" + std::to_string(b + 1) + "]"));
        s.entities[i].aspects.push_back(a);
    }
    r.summary = s;
    r.status = RunStatus::complete;
    return r;
}

std::vector<RunRecord> run_of(std::size_t n, const std::string& marker, int bullets = 3) {
    std::vector<RunRecord> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(record("q" + std::to_string(i + 1), marker, bullets));
    return out;
}

ComparisonOptions options(std::vector<std::string> judges, int iterations = 200) {
    ComparisonOptions o;
    o.dataset = "Synthetic";
    o.method_a = "X";
    o.method_b = "Y";
    o.judge_models = std::move(judges);
    o.bootstrap_iterations = iterations;
    o.seed = 1;
    return o;
}

std::unique_ptr<Gateway> gateway_with(const std::string& id, JudgeBackend::Fn fn) {
    auto gw = testing::mock_gateway();
    gw->register_model(id, std::make_shared<JudgeBackend>(std::move(fn)));
    return gw;
}

TEST(WinRate, Examples) {
    EXPECT_DOUBLE_EQ(compute_win_rate({Criterion::contrast, 8, 1, 1, 0}, Winner::a), 0.85);
    EXPECT_DOUBLE_EQ(compute_win_rate({Criterion::contrast, 0, 0, 10, 0}, Winner::a), 0.5);
    EXPECT_DOUBLE_EQ(compute_win_rate({Criterion::contrast, 0, 0, 10, 0}, Winner::b), 0.5);
    EXPECT_DOUBLE_EQ(compute_win_rate({Criterion::contrast, 87, 13, 0, 0}, Winner::a), 0.87);
    EXPECT_THROW(compute_win_rate({}, Winner::a), NumericDomainError);
    EXPECT_THROW(compute_win_rate({Criterion::contrast, 1, 0, 0, 0}, Winner::tie), Error);
}

// Oracle: score each verdict individually (1, 0.5 or 0) and average.
TEST(WinRate, MatchesVerdictEnumeration) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> len(1, 200), pick(0, 2);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<JudgeVerdict> verdicts;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            const auto w = std::array{Winner::a, Winner::b, Winner::tie}[static_cast<std::size_t>(pick(rng))];
            verdicts.push_back(JudgeVerdict{"q" + std::to_string(i), Criterion::relevancy, w, "", "x", JudgeOrder::ab});
        }
        double points_a = 0, points_b = 0;
        for (const auto& v : verdicts) {
            points_a += v.winner == Winner::a ? 1.0 : v.winner == Winner::tie ? 0.5 : 0.0;
            points_b += v.winner == Winner::b ? 1.0 : v.winner == Winner::tie ? 0.5 : 0.0;
        }
        const auto tally = tally_verdicts(verdicts)[1];
        EXPECT_EQ(tally.total(), n);
        const auto ra = compute_win_rate(tally, Winner::a);
        const auto rb = compute_win_rate(tally, Winner::b);
        EXPECT_EQ(ra, points_a / n);
        EXPECT_EQ(rb, points_b / n);
        EXPECT_LE(std::abs(ra + rb - 1.0), 1e-12);
    }
}

TEST(JudgeLabels, SwapInBaOrder) {
    EXPECT_EQ(winner_from_label("A", JudgeOrder::ab), Winner::a);
    EXPECT_EQ(winner_from_label(" a ", JudgeOrder::ba), Winner::b);
    EXPECT_EQ(winner_from_label("B", JudgeOrder::ba), Winner::a);
    EXPECT_EQ(winner_from_label("Tie", JudgeOrder::ba), Winner::tie);
    EXPECT_FALSE(winner_from_label("C", JudgeOrder::ab));
    EXPECT_FALSE(winner_from_label("", JudgeOrder::ab));
}

TEST(JudgeLabels, ParseMarksBadCriteriaMissing) {
    auto j = Json::parse(all_criteria("A"));
    j["diversity"] = "maybe";
    j["usefulness_explanation"] = "  ";
    const auto d = parse_judge_response(j, "q1", JudgeOrder::ab);
    EXPECT_EQ(d.verdicts.size(), 2u);
    ASSERT_EQ(d.missing.size(), 2u);
    EXPECT_EQ(d.missing[0].criterion, Criterion::diversity);
    EXPECT_EQ(d.missing[1].criterion, Criterion::usefulness);
    EXPECT_EQ(parse_judge_response(Json::array(), "q1", JudgeOrder::ba).missing.size(), 4u);
}

TEST(JudgePair, AbAndBaMapping) {
    auto gw = gateway_with("scripted", [](const ChatRequest&) { return all_criteria("A"); });
    ComparisonTask t{testing::make_query("q1", "x"), "X", "Y", "one", "two", "scripted"};
    const auto p = judge_pair(*gw, t);
    ASSERT_EQ(p.directions[0].verdicts.size(), 4u);
    ASSERT_EQ(p.directions[1].verdicts.size(), 4u);
    for (const auto& v : p.directions[0].verdicts) EXPECT_EQ(v.winner, Winner::a);
    for (const auto& v : p.directions[1].verdicts) {
        EXPECT_EQ(v.winner, Winner::b);
        EXPECT_EQ(v.raw_label, "A");
        EXPECT_EQ(v.order, JudgeOrder::ba);
    }
}

TEST(JudgePair, AllTiesGiveEightTieVerdicts) {
    auto gw = gateway_with("scripted", [](const ChatRequest&) { return all_criteria("tie"); });
    const auto p = judge_pair(*gw, ComparisonTask{testing::make_query("q1", "x"), "X", "Y", "one", "two", "scripted"});
    std::size_t ties = 0;
    for (const auto& d : p.directions) {
        for (const auto& v : d.verdicts) ties += v.winner == Winner::tie ? 1 : 0;
    }
    EXPECT_EQ(ties, 8u);
}

TEST(JudgePair, UnparsableResponseRetriedThenMissing) {
    auto backend = std::make_shared<JudgeBackend>([](const ChatRequest&) { return std::string("I refuse."); });
    auto gw = testing::mock_gateway();
    gw->register_model("scripted", backend);
    JudgeOptions o;
    o.retries = 1;
    const auto p = judge_pair(*gw, ComparisonTask{testing::make_query("q1", "x"), "X", "Y", "one", "two", "scripted"}, o);
    EXPECT_EQ(backend->calls.load(), 4);
    for (const auto& d : p.directions) {
        EXPECT_TRUE(d.verdicts.empty());
        EXPECT_EQ(d.missing.size(), 4u);
    }
}

TEST(JudgePair, RejectsBadTasks) {
    auto gw = testing::mock_gateway();
    EXPECT_THROW(judge_pair(*gw, ComparisonTask{testing::make_query("q", "x"), "X", "Y", "", "b", "mock-judge"}), EvaluationError);
    EXPECT_THROW(judge_pair(*gw, ComparisonTask{testing::make_query("q", "x"), "X", "X", "a", "b", "mock-judge"}), EvaluationError);
}

TEST(CompareRuns, SelfComparisonIsNeutral) {
    auto gw = testing::mock_gateway();
    const auto run = run_of(6, "same");
    const auto results = compare_runs(*gw, run, run, options({"mock-judge"}));
    ASSERT_EQ(results.size(), 1u);
    for (const auto& c : results[0].report.criteria) {
        EXPECT_EQ(c.win_rate, 0.5);
        EXPECT_EQ(c.ci_low, 0.5);
        EXPECT_EQ(c.ci_high, 0.5);
        EXPECT_EQ(c.ties, 12);
    }
}

TEST(CompareRuns, ScriptedPreferenceGivesOne) {
    auto gw = gateway_with("prefers-x", [](const ChatRequest& r) {
        return all_criteria(explanation_a(r.prompt).find("xmark") != std::string::npos ? "A" : "B");
    });
    const auto results = compare_runs(*gw, run_of(5, "xmark"), run_of(5, "ymark"), options({"prefers-x"}));
    for (const auto& c : results[0].report.criteria) {
        EXPECT_EQ(c.win_rate, 1.0);
        EXPECT_EQ(c.wins, 10);
        EXPECT_EQ(c.losses, 0);
    }
}

TEST(CompareRuns, PositionBiasCancels) {
    auto gw = testing::mock_gateway();
    for (const auto* judge : {"mock-judge-first", "mock-judge-second"}) {
        const auto results = compare_runs(*gw, run_of(7, "xmark"), run_of(7, "ymark"), options({judge}));
        for (const auto& c : results[0].report.criteria) {
            EXPECT_EQ(c.win_rate, 0.5) << judge;
            EXPECT_EQ(c.wins, 7);
            EXPECT_EQ(c.losses, 7);
        }
    }
}

TEST(CompareRuns, EachQueryJudgedTwicePerCriterion) {
    auto gw = testing::mock_gateway();
    const std::size_t n = 9;
    const auto results = compare_runs(*gw, run_of(n, "aa", 3), run_of(n, "bb", 2), options({"mock-judge", "mock-judge-first"}));
    ASSERT_EQ(results.size(), 2u);
    for (const auto& r : results) {
        EXPECT_EQ(r.report.queries, static_cast<long>(n));
        for (const auto& c : r.report.criteria) EXPECT_EQ(c.total() + c.missing, static_cast<long>(2 * n));
        for (std::size_t i = 1; i < r.verdicts.size(); ++i) {
            const auto& p = r.verdicts[i - 1];
            const auto& q = r.verdicts[i];
            EXPECT_LE(std::tie(p.query_id, p.order), std::tie(q.query_id, q.order));
        }
        // Every query contributes exactly one AB and one BA verdict per criterion.
        std::map<std::tuple<std::string, JudgeOrder, Criterion>, int> seen;
        for (const auto& v : r.verdicts) ++seen[{v.query_id, v.order, v.criterion}];
        EXPECT_EQ(seen.size(), 2 * n * 4);
        for (const auto& [k, count] : seen) EXPECT_EQ(count, 1);
    }
    // The honest judge prefers the run with more cited bullets.
    EXPECT_EQ(results[0].report.criteria[0].win_rate, 1.0);
}

TEST(CompareRuns, QuerySetMismatchNamesIds) {
    auto gw = testing::mock_gateway();
    auto x = run_of(3, "a");
    auto y = run_of(2, "b");
    try {
        compare_runs(*gw, x, y, options({"mock-judge"}));
        FAIL();
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find("q3"), std::string::npos);
    }
}

TEST(CompareRuns, MissingSummaryBecomesMissingJudgments) {
    auto gw = testing::mock_gateway();
    auto x = run_of(3, "a");
    x[1].summary.reset();
    x[1].status = RunStatus::partial;
    const auto r = compare_runs(*gw, x, run_of(3, "a"), options({"mock-judge"}))[0];
    EXPECT_EQ(r.missing.size(), 8u);
    for (const auto& c : r.report.criteria) {
        EXPECT_EQ(c.missing, 2);
        EXPECT_EQ(c.total(), 4);
    }
}

TEST(CompareRuns, ConfigurationErrors) {
    auto gw = testing::mock_gateway();
    const auto run = run_of(2, "a");
    EXPECT_THROW(compare_runs(*gw, run, run, options({"no-such-judge"})), ConfigError);
    EXPECT_THROW(compare_runs(*gw, run, run, options({})), EvaluationError);
    auto same = options({"mock-judge"});
    same.method_b = "X";
    EXPECT_THROW(compare_runs(*gw, run, run, same), EvaluationError);
}

TEST(CompareRuns, ReportIsSeedDeterministic) {
    auto gw = testing::mock_gateway();
    std::vector<RunRecord> x, y;
    for (std::size_t i = 0; i < 10; ++i) {
        x.push_back(record("q" + std::to_string(i), "a", 1 + static_cast<int>(i % 3)));
        y.push_back(record("q" + std::to_string(i), "b", 2));
    }
    const auto r1 = compare_runs(*gw, x, y, options({"mock-judge"}, 500))[0];
    auto par = options({"mock-judge"}, 500);
    par.parallel = 4;
    const auto r2 = compare_runs(*gw, x, y, par)[0];
    EXPECT_EQ(r1.report, r2.report);
    EXPECT_EQ(r1.verdicts, r2.verdicts);
    for (const auto& c : r1.report.criteria) {
        EXPECT_LE(c.ci_low, c.win_rate);
        EXPECT_LE(c.win_rate, c.ci_high);
    }
}

TEST(BuildReport, EmptyCriterionReportsZeros) {
    std::vector<MissingJudgment> missing = {{"q1", JudgeOrder::ab, Criterion::contrast, "bad"}};
    const std::vector<JudgeVerdict> verdicts = {{"q1", Criterion::relevancy, Winner::a, "A", "x", JudgeOrder::ab}};
    const auto r = build_report(verdicts, missing, options({"j"}), "j", 1);
    EXPECT_EQ(r.criteria[0].total(), 0);
    EXPECT_EQ(r.criteria[0].missing, 1);
    EXPECT_EQ(r.criteria[0].win_rate, 0.0);
    EXPECT_EQ(r.criteria[1].win_rate, 1.0);
}

}  // namespace
}  // namespace qstrum

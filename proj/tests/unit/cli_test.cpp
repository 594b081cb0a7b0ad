#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "qstrum/content_store.hpp"
#include "qstrum/errors.hpp"
#include "qstrum/report.hpp"
#include "qstrum_app/commands.hpp"
#include "qstrum_app/config.hpp"
#include "test_support.hpp"

namespace qstrum::app {
namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

// Writes a dataset with `queries` queries over `entities` entities, `per_entity` snippets each.
void write_dataset(const std::filesystem::path& dir, std::size_t queries, std::size_t entities, std::size_t per_entity) {
    std::string s;
    for (std::size_t e = 0; e < entities; ++e) {
        const auto set = testing::make_snippet_set("city-" + std::to_string(e + 1), "City " + std::to_string(e + 1), per_entity, e);
        for (const auto& sn : set.snippets) {
            s += Json{{"entity_id", set.entity_id}, {"entity_name", set.entity_name}, {"text", sn.text}}.dump() + "\n";
        }
    }
    std::string q;
    for (std::size_t i = 0; i < queries; ++i) {
        const auto& topic = testing::topic_words()[i % testing::topic_words().size()];
        q += Json{{"id", "q" + std::to_string(i + 1)}, {"text", "places with great " + topic}, {"domain_label", "destination"}}.dump() + "\n";
    }
    write_file_atomic(dir / "snippets.jsonl", s);
    write_file_atomic(dir / "queries.jsonl", q);
}

RunConfig workspace_config(const testing::TempDir& dir) {
    RunConfig c;
    c.workspace = dir / "ws";
    c.snippets = dir / "snippets.jsonl";
    c.queries = dir / "queries.jsonl";
    c.dataset = "Synthetic";
    c.k = 10;
    c.bootstrap_iterations = 200;
    return c;
}

TEST(Config, ParseText) {
    const auto kv = parse_config_text("# comment\n\nmodel = mock \n judge_model=a, b\nkey = ${HOME_X}/x\n",
                                      env_of({{"HOME_X", "/h"}}));
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"model", "mock"}));
    EXPECT_EQ(kv[2].second, "/h/x");
}

TEST(Config, ParseErrorsNameSourceAndLine) {
    const auto env = env_of({});
    for (const auto* text : {"model mock\n", "a = 1\na = 2\n", " = x\n", "x = ${UNSET}\n"}) {
        try {
            parse_config_text(text, env, "cfg.txt");
            FAIL() << text;
        } catch (const ConfigError& e) {
            EXPECT_NE(std::string(e.what()).find("cfg.txt"), std::string::npos) << e.what();
        }
    }
}

TEST(Config, ExpandEnv) {
    const auto env = env_of({{"A", "1"}, {"B", "two"}});
    EXPECT_EQ(expand_env("${A}-${B}-plain", env), "1-two-plain");
    EXPECT_EQ(expand_env("no refs", env), "no refs");
    EXPECT_THROW(expand_env("${A", env), ConfigError);
    EXPECT_THROW(expand_env("${C}", env), ConfigError);
}

TEST(Config, ApplySetting) {
    RunConfig c;
    apply_setting(c, "k", "7");
    apply_setting(c, "judge_model", "j1, j2");
    apply_setting(c, "temperature", "0.5");
    apply_setting(c, "backend.gpt.kind", "openai");
    apply_setting(c, "backend.gpt.base_url", "https://example.invalid");
    EXPECT_EQ(c.k, 7u);
    EXPECT_EQ(c.judge_models, (std::vector<std::string>{"j1", "j2"}));
    EXPECT_DOUBLE_EQ(c.temperature, 0.5);
    EXPECT_EQ(c.backends.at("gpt").kind, "openai");
    EXPECT_THROW(apply_setting(c, "colour", "x"), ConfigError);
    EXPECT_THROW(apply_setting(c, "k", "seven"), ConfigError);
    EXPECT_THROW(apply_setting(c, "backend.gpt.kind", "gemini"), ConfigError);
    EXPECT_THROW(apply_setting(c, "backend.gpt.colour", "x"), ConfigError);
}

TEST(Config, Validate) {
    RunConfig c;
    EXPECT_NO_THROW(validate_config(c));
    auto bad = [](auto mutate) {
        RunConfig c;
        mutate(c);
        EXPECT_THROW(validate_config(c), ConfigError);
    };
    bad([](RunConfig& c) { c.tone = "nice"; });
    bad([](RunConfig& c) { c.variant = "essay"; });
    bad([](RunConfig& c) { c.k = 0; });
    bad([](RunConfig& c) { c.strictness = "loose"; });
    bad([](RunConfig& c) { c.judge_models.clear(); });
    bad([](RunConfig& c) { c.backends["x"] = BackendSpec{"x", "openai", "", "", "K", 10}; });
    c.variant = "debate";
    c.tone = "aggressive";
    EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, SnapshotRecordsKeyNameOnly) {
    ::setenv("QSTRUM_CLI_TEST_KEY", "sk-very-secret", 1);
    RunConfig c;
    c.backends["gpt"] = BackendSpec{"gpt", "openai", "https://x", "m", "QSTRUM_CLI_TEST_KEY", 10};
    const auto dump = c.snapshot().dump();
    EXPECT_NE(dump.find("QSTRUM_CLI_TEST_KEY"), std::string::npos);
    EXPECT_EQ(dump.find("sk-very-secret"), std::string::npos);
}

TEST(Commands, MethodLabels) {
    EXPECT_EQ(method_label("base"), "Base");
    EXPECT_EQ(method_label("contrastive"), "Contrastive");
    EXPECT_EQ(method_label("debate"), "Debate");
    EXPECT_EQ(method_label("debate-nice"), "Debate (Nice)");
    EXPECT_EQ(method_label("debate-aggressive"), "Debate (Aggressive)");
}

TEST(Commands, IngestPrintsCounts) {
    testing::TempDir dir;
    write_dataset(dir.path(), 4, 6, 5);
    const auto c = workspace_config(dir);
    std::ostringstream out, err;
    EXPECT_EQ(cmd_ingest(c, out, err), kExitOk);
    EXPECT_NE(out.str().find("queries: 4\nentities: 6\nsnippets: 30\nmean snippets per entity: 5.00\n"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dataset_dir(c) / "snippets.jsonl"));

    RunConfig from_ws = c;
    from_ws.snippets.reset();
    from_ws.queries.reset();
    std::ostringstream again;
    EXPECT_EQ(cmd_summarize_dataset(from_ws, again, err), kExitOk);
    EXPECT_EQ(again.str(), out.str());
}

TEST(Commands, MissingInputsAreConfigErrors) {
    testing::TempDir dir;
    auto c = workspace_config(dir);
    std::ostringstream out, err;
    EXPECT_THROW(cmd_ingest(c, out, err), ConfigError);
    c.snippets.reset();
    c.queries.reset();
    EXPECT_THROW(cmd_summarize_dataset(c, out, err), ConfigError);
    EXPECT_THROW(cmd_rank(c, std::nullopt, out, err), ConfigError);
    EXPECT_THROW(cmd_report({}, std::nullopt, out, err), ConfigError);
}

TEST(Commands, EndToEndOnMocks) {
    testing::TempDir dir;
    write_dataset(dir.path(), 3, 5, 12);
    auto c = workspace_config(dir);
    std::ostringstream out, err;
    ASSERT_EQ(cmd_ingest(c, out, err), kExitOk);
    ASSERT_EQ(cmd_rank(c, std::nullopt, out, err), kExitOk) << err.str();
    EXPECT_THROW(cmd_rank(c, std::string("q99"), out, err), ConfigError);
    for (const auto* variant : {"base", "contrastive"}) {
        c.variant = variant;
        ASSERT_EQ(cmd_run(c, out, err), kExitOk) << err.str();
        EXPECT_TRUE(std::filesystem::exists(runs_dir(c) / variant / "manifest.json"));
    }
    EXPECT_NE(out.str().find("network calls: 0"), std::string::npos);

    c.judge_models = {"mock-judge", "mock-judge-first"};
    std::ostringstream judged;
    ASSERT_EQ(cmd_judge(c, "contrastive", "base", std::nullopt, std::nullopt, judged, err), kExitOk) << err.str();
    EXPECT_NE(judged.str().find("| Criterion | Synthetic: Contrastive vs. Base |"), std::string::npos);
    const auto first = reports_dir(c) / "Synthetic.contrastive_vs_base.mock-judge-first.json";
    const auto report = load_report(first);
    for (const auto& rate : report.criteria) {
        EXPECT_EQ(rate.total(), 6);
        EXPECT_EQ(rate.win_rate, 0.5);
    }

    const std::vector<std::filesystem::path> files = {reports_dir(c) / "Synthetic.contrastive_vs_base.mock-judge.json", first};
    std::ostringstream table;
    EXPECT_EQ(cmd_report(files, dir / "table.md", table, err), kExitOk);
    EXPECT_EQ(read_file(dir / "table.md"), table.str());
    EXPECT_EQ(table.str().find("Judge: mock-judge\n"), 0u);

    EXPECT_THROW(cmd_judge(c, "contrastive", "nope", std::nullopt, std::nullopt, out, err), ConfigError);
    c.model = "no-such-model";
    EXPECT_THROW(cmd_run(c, out, err), ConfigError);
}

TEST(Commands, RunWithoutRankingIsPartial) {
    testing::TempDir dir;
    write_dataset(dir.path(), 2, 4, 10);
    auto c = workspace_config(dir);
    std::ostringstream out, err;
    ASSERT_EQ(cmd_ingest(c, out, err), kExitOk);
    ASSERT_EQ(cmd_rank(c, std::string("q1"), out, err), kExitOk);
    EXPECT_EQ(cmd_run(c, out, err), kExitPartial);
    EXPECT_NE(err.str().find("q2: not ranked yet"), std::string::npos);
}

}  // namespace
}  // namespace qstrum::app

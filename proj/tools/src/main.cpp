#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qstrum/errors.hpp"
#include "qstrum_app/commands.hpp"
#include "qstrum_app/config.hpp"

namespace {

using qstrum::app::RunConfig;

// Flag name -> config key. Flags override values from --config.
const std::map<std::string, std::string> kFlagKeys = {
    {"workspace", "workspace"},     {"snippets", "snippets"},       {"queries", "queries"},
    {"dataset", "dataset"},         {"model", "model"},             {"judge-model", "judge_model"},
    {"embed-model", "embed_model"}, {"variant", "variant"},         {"tone", "tone"},
    {"k", "k"},                     {"retries", "retries"},         {"temperature", "temperature"},
    {"max-tokens", "max_tokens"},   {"cache-dir", "cache_dir"},     {"seed", "seed"},
    {"parallel", "parallel"},       {"strictness", "strictness"},   {"run-id", "run_id"},
    {"bootstrap-iterations", "bootstrap_iterations"},
};

struct Flags {
    std::string config_file;
    std::map<std::string, std::string> values;
};

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config_file, "key = value config file");
    for (const auto& [flag, key] : kFlagKeys) {
        auto* opt = cmd->add_option_function<std::string>(
            "--" + flag, [&flags, key = key](const std::string& v) { flags.values[key] = v; });
        if (flag == "variant") opt->check(CLI::IsMember({"base", "contrastive", "debate"}));
        if (flag == "tone") opt->check(CLI::IsMember({"standard", "nice", "aggressive"}));
        if (flag == "strictness") opt->check(CLI::IsMember({"strict", "lenient"}));
    }
}

RunConfig resolve(const Flags& flags) {
    RunConfig config = flags.config_file.empty() ? RunConfig{} : qstrum::app::load_config_file(flags.config_file);
    for (const auto& [key, value] : flags.values) qstrum::app::apply_setting(config, key, value);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query-driven contrastive summarization pipelines and pairwise judging"};
    app.require_subcommand(1);
    Flags flags;

    auto* ingest = app.add_subcommand("ingest", "Validate and copy a snippet dataset into the workspace");
    auto* summarize = app.add_subcommand("summarize-dataset", "Print dataset statistics");
    auto* rank = app.add_subcommand("rank", "Select the top entity pair and snippets per query");
    auto* run = app.add_subcommand("run", "Run a pipeline variant over ranked queries");
    auto* judge = app.add_subcommand("judge", "Judge two runs pairwise in both orders");
    auto* report = app.add_subcommand("report", "Merge report files into one table per judge");
    for (auto* cmd : {ingest, summarize, rank, run, judge}) add_common(cmd, flags);

    std::optional<std::string> query_id;
    rank->add_option("--query", query_id, "Rank only this query id");

    std::string run_x, run_y;
    std::optional<std::string> label_x, label_y;
    judge->add_option("run_x", run_x, "Run id of method A")->required();
    judge->add_option("run_y", run_y, "Run id of method B")->required();
    judge->add_option("--label-a", label_x, "Report label for method A");
    judge->add_option("--label-b", label_y, "Report label for method B");

    std::vector<std::filesystem::path> report_files;
    std::optional<std::filesystem::path> report_output;
    report->add_option("files", report_files, "Report JSON files")->required();
    report->add_option("-o,--output", report_output, "Also write the table to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qstrum::app::kExitConfig;
    }

    try {
        if (*report) return qstrum::app::cmd_report(report_files, report_output, std::cout, std::cerr);
        const auto config = resolve(flags);
        if (*ingest) return qstrum::app::cmd_ingest(config, std::cout, std::cerr);
        if (*summarize) return qstrum::app::cmd_summarize_dataset(config, std::cout, std::cerr);
        if (*rank) return qstrum::app::cmd_rank(config, query_id, std::cout, std::cerr);
        if (*run) return qstrum::app::cmd_run(config, std::cout, std::cerr);
        if (*judge) return qstrum::app::cmd_judge(config, run_x, run_y, label_x, label_y, std::cout, std::cerr);
    } catch (const qstrum::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return qstrum::app::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return qstrum::app::kExitPartial;
    }
    return qstrum::app::kExitConfig;
}

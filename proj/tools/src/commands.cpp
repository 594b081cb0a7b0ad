#include "qstrum_app/commands.hpp"

#include <cstdio>
#include <ostream>

#include "qstrum/artifact_store.hpp"
#include "qstrum/content_store.hpp"
#include "qstrum/dataset.hpp"
#include "qstrum/errors.hpp"
#include "qstrum/evaluation.hpp"
#include "qstrum/http_backend.hpp"
#include "qstrum/mock_backend.hpp"
#include "qstrum/pipeline.hpp"
#include "qstrum/report.hpp"
#include "qstrum/retrieval.hpp"

namespace qstrum::app {
namespace fs = std::filesystem;
namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

HttpEndpointConfig endpoint_of(const BackendSpec& b) {
    HttpEndpointConfig e;
    e.id = b.id;
    e.api = b.kind == "anthropic" ? ApiKind::anthropic : ApiKind::openai;
    e.base_url = b.base_url;
    e.model_name = b.model_name.empty() ? b.id : b.model_name;
    e.api_key_env = b.api_key_env;
    e.timeout_seconds = b.timeout_seconds;
    return e;
}

fs::path require_file(const std::optional<fs::path>& path, const char* what) {
    if (!path) throw ConfigError(std::string("no ") + what + " file given");
    if (!fs::is_regular_file(*path)) throw ConfigError(std::string(what) + " file not found: " + path->string());
    return *path;
}

void print_summary(const DatasetSummary& s, std::ostream& out) {
    out << "queries: " << s.queries << '\n'
        << "entities: " << s.entities << '\n'
        << "snippets: " << s.snippets << '\n'
        << "mean snippets per entity: " << fixed2(s.mean_snippets_per_entity) << '\n'
        << "mean snippet length: " << fixed2(s.mean_snippet_length) << '\n';
}

fs::path ingested(const RunConfig& config, const char* name) {
    const auto path = dataset_dir(config) / name;
    if (!fs::is_regular_file(path)) throw ConfigError("workspace has no ingested dataset (missing " + path.string() + ")");
    return path;
}

Json read_json(const fs::path& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

struct LoadedRun {
    std::string label;
    std::vector<RunRecord> records;
};

LoadedRun load_run(const RunConfig& config, const std::string& run_id) {
    const ArtifactStore store(runs_dir(config) / run_id);
    const auto manifest = store.read_manifest();
    if (!manifest) throw ConfigError("unknown run '" + run_id + "' (no manifest under " + store.root().string() + ")");
    LoadedRun run;
    run.label = manifest->at("variant").get<Variant>().label();
    for (const auto& id : manifest->at("queries")) {
        const auto record = store.read(id.get<std::string>(), run.label, "record");
        if (!record) throw Error("run " + run_id + " has no record for query " + id.get<std::string>());
        run.records.push_back(record->get<RunRecord>());
    }
    return run;
}

}  // namespace

std::unique_ptr<Gateway> make_gateway(const RunConfig& config, SleepFn sleep) {
    Gateway::Options options;
    options.max_in_flight = std::max<std::size_t>(config.parallel, 1) * 2;
    options.cache_dir = config.llm_cache_dir();
    options.sleep = std::move(sleep);
    auto gateway = std::make_unique<Gateway>(std::move(options));
    gateway->register_model("mock", std::make_shared<MockBackend>("mock"));
    gateway->register_model("mock-judge", std::make_shared<MockBackend>("mock-judge", MockJudgePolicy::honest));
    gateway->register_model("mock-judge-first",
                            std::make_shared<MockBackend>("mock-judge-first", MockJudgePolicy::first_position));
    gateway->register_model("mock-judge-second",
                            std::make_shared<MockBackend>("mock-judge-second", MockJudgePolicy::second_position));
    // Hosted backends are constructed only when used, so a missing key for an
    // unused backend does not block offline work.
    auto needed = config.judge_models;
    needed.push_back(config.model);
    for (const auto& [id, spec] : config.backends) {
        if (spec.kind == "openai-embedding") continue;
        if (std::find(needed.begin(), needed.end(), id) == needed.end()) continue;
        gateway->register_model(id, std::make_shared<HttpChatBackend>(endpoint_of(spec)));
    }
    return gateway;
}

std::shared_ptr<EmbeddingBackend> make_embedding_backend(const RunConfig& config) {
    if (auto it = config.backends.find(config.embed_model); it != config.backends.end()) {
        if (it->second.kind != "openai-embedding") {
            throw ConfigError("backend " + it->first + " is not an embedding backend");
        }
        return std::make_shared<HttpEmbeddingBackend>(endpoint_of(it->second));
    }
    if (config.embed_model == "mock-embed") return std::make_shared<MockEmbeddingBackend>("mock-embed");
    throw ConfigError("unknown embedding model '" + config.embed_model + "'");
}

fs::path dataset_dir(const RunConfig& config) { return config.workspace / "dataset"; }
fs::path ranked_dir(const RunConfig& config) { return config.workspace / "ranked"; }
fs::path runs_dir(const RunConfig& config) { return config.workspace / "runs"; }
fs::path reports_dir(const RunConfig& config) { return config.workspace / "reports"; }

std::string method_label(std::string_view variant_label) {
    const auto v = Variant::parse_label(variant_label);
    std::string out;
    switch (v.kind) {
        case VariantKind::base: out = "Base"; break;
        case VariantKind::contrastive: out = "Contrastive"; break;
        case VariantKind::debate: out = "Debate"; break;
    }
    if (v.tone == Tone::nice) out += " (Nice)";
    if (v.tone == Tone::aggressive) out += " (Aggressive)";
    return out;
}

int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream&) {
    const auto snippets = require_file(config.snippets, "snippets");
    const auto queries = require_file(config.queries, "queries");
    const auto dataset = load_dataset(snippets, queries);
    const auto summary = summarize_dataset(dataset);
    write_file_atomic(dataset_dir(config) / "snippets.jsonl", read_file(snippets));
    write_file_atomic(dataset_dir(config) / "queries.jsonl", read_file(queries));
    write_file_atomic(dataset_dir(config) / "summary.json", canonical_dump(Json(summary)));
    print_summary(summary, out);
    return kExitOk;
}

int cmd_summarize_dataset(const RunConfig& config, std::ostream& out, std::ostream&) {
    const bool given = config.snippets || config.queries;
    const auto snippets = given ? require_file(config.snippets, "snippets") : ingested(config, "snippets.jsonl");
    const auto queries = given ? require_file(config.queries, "queries") : ingested(config, "queries.jsonl");
    print_summary(summarize_dataset(load_dataset(snippets, queries)), out);
    return kExitOk;
}

int cmd_rank(const RunConfig& config, const std::optional<std::string>& query_id, std::ostream& out,
             std::ostream& err) {
    validate_config(config);
    const auto dataset = load_dataset(ingested(config, "snippets.jsonl"), ingested(config, "queries.jsonl"));
    std::vector<Query> selected;
    if (query_id) {
        const auto* q = dataset.find_query(*query_id);
        if (q == nullptr) throw ConfigError("unknown query id '" + *query_id + "'");
        selected.push_back(*q);
    } else {
        selected = dataset.queries;
    }
    Embedder::Options options;
    options.cache_dir = config.embed_cache_dir();
    Embedder embedder(make_embedding_backend(config), options);
    const auto corpus = embed_corpus(dataset, embedder);
    bool failed = false;
    for (const auto& query : selected) {
        try {
            const auto ranked = rank_query(query, dataset, corpus, embedder, config.k);
            write_file_atomic(ranked_dir(config) / (path_component(query.id) + ".json"), canonical_dump(Json(ranked)));
            out << query.id << ": " << ranked.pair[0].entity_name << " (" << ranked.ranking[0].score << ") vs "
                << ranked.pair[1].entity_name << " (" << ranked.ranking[1].score << ")\n";
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            err << query.id << ": " << e.what() << '\n';
            failed = true;
        }
    }
    const auto stats = embedder.stats();
    out << "embedding calls: " << stats.backend_calls << ", cache hits: " << stats.cache_hits
        << ", network calls: " << stats.network_calls << '\n';
    return failed ? kExitPartial : kExitOk;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    validate_config(config);
    const auto variant = Variant::make(parse_variant_kind(config.variant), parse_tone(config.tone));
    auto gateway = make_gateway(config);
    if (!gateway->knows(config.model)) throw ConfigError("unknown model id '" + config.model + "'");
    PipelineOptions options;
    options.model_id = config.model;
    options.temperature = config.temperature;
    options.max_tokens = config.max_tokens;
    options.strictness = parse_strictness(config.strictness);
    options.validation_retries = config.retries;

    const auto queries = load_queries(ingested(config, "queries.jsonl"));
    std::vector<RankedQuery> ranked;
    bool failed = false;
    for (const auto& q : queries) {
        const auto path = ranked_dir(config) / (path_component(q.id) + ".json");
        if (!fs::is_regular_file(path)) {
            err << q.id << ": not ranked yet (missing " << path.string() << ")\n";
            failed = true;
            continue;
        }
        ranked.push_back(read_json(path).get<RankedQuery>());
    }

    const auto run_id = config.run_id.empty() ? variant.label() : config.run_id;
    const ArtifactStore store(runs_dir(config) / run_id);
    const Pipeline pipeline(*gateway, options, &store);
    const auto records = run_batch(pipeline, ranked, variant, config.parallel);

    TokenUsage total;
    for (const auto& r : records) {
        total += r.tokens;
        out << r.query.id << ": " << to_string(r.status) << ", tokens " << r.tokens.prompt_tokens << " prompt / "
            << r.tokens.completion_tokens << " completion\n";
        for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
        if (r.status != RunStatus::complete) {
            err << r.query.id << ": " << r.error << '\n';
            failed = true;
        }
    }
    auto snapshot = config.snapshot();
    snapshot["run_id"] = run_id;
    store.write_manifest(build_manifest(snapshot, options, variant, records));
    const auto stats = gateway->stats();
    out << "run " << run_id << ": " << records.size() << " queries, tokens " << total.prompt_tokens << " prompt / "
        << total.completion_tokens << " completion\n"
        << "backend calls: " << stats.backend_calls << ", cache hits: " << stats.cache_hits
        << ", network calls: " << stats.network_calls << '\n';
    return failed ? kExitPartial : kExitOk;
}

int cmd_judge(const RunConfig& config, const std::string& run_x, const std::string& run_y,
              const std::optional<std::string>& label_x, const std::optional<std::string>& label_y,
              std::ostream& out, std::ostream& err) {
    validate_config(config);
    auto gateway = make_gateway(config);
    const auto x = load_run(config, run_x);
    const auto y = load_run(config, run_y);

    ComparisonOptions options;
    options.dataset = config.dataset_label();
    options.method_a = label_x.value_or(method_label(x.label));
    options.method_b = label_y.value_or(method_label(y.label));
    if (options.method_a == options.method_b) {
        options.method_a = label_x.value_or(run_x);
        options.method_b = label_y.value_or(run_y);
    }
    options.judge_models = config.judge_models;
    options.judge.temperature = config.temperature;
    options.judge.max_tokens = config.max_tokens;
    options.judge.retries = config.retries;
    options.bootstrap_iterations = config.bootstrap_iterations;
    options.seed = config.seed;
    options.parallel = config.parallel;

    const auto results = compare_runs(*gateway, x.records, y.records, options);
    bool missing = false;
    for (const auto& result : results) {
        const auto stem = path_component(options.dataset) + "." + path_component(run_x) + "_vs_" +
                          path_component(run_y) + "." + path_component(result.report.judge_model);
        const auto paths = write_report(reports_dir(config), stem, result);
        out << report_markdown(result.report) << "report: " << paths.json.string() << "\n\n";
        for (const auto& m : result.missing) {
            err << m.query_id << " " << to_string(m.order) << " " << to_string(m.criterion) << ": " << m.reason << '\n';
            missing = true;
        }
    }
    const auto stats = gateway->stats();
    out << "backend calls: " << stats.backend_calls << ", cache hits: " << stats.cache_hits
        << ", network calls: " << stats.network_calls << '\n';
    return missing ? kExitPartial : kExitOk;
}

int cmd_report(std::span<const fs::path> files, const std::optional<fs::path>& output, std::ostream& out,
               std::ostream&) {
    if (files.empty()) throw ConfigError("report needs at least one report file");
    std::vector<WinRateReport> reports;
    for (const auto& f : files) reports.push_back(load_report(f));
    const auto table = merge_reports(reports);
    if (output) write_file_atomic(*output, table);
    out << table;
    return kExitOk;
}

}  // namespace qstrum::app

#include "qstrum/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "qstrum/errors.hpp"
#include "qstrum/json_extract.hpp"

namespace qstrum {
namespace {

constexpr std::size_t kMaxCorrections = 5;

std::string one_line(std::string_view s) {
    std::string out(s);
    std::replace(out.begin(), out.end(), '\n', ' ');
    return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += sep;
        out += item;
    }
    return out;
}

std::string corrective_suffix(const std::vector<std::string>& violations) {
    std::vector<std::string> shown(violations.begin(),
                                   violations.begin() + static_cast<long>(std::min(violations.size(), kMaxCorrections)));
    for (auto& s : shown) s = one_line(s);
    if (violations.size() > shown.size()) {
        shown.push_back("and " + std::to_string(violations.size() - shown.size()) + " more");
    }
    return "\n\nYour previous answer was rejected: " + join(shown, "; ") +
           ". Reply again with the corrected JSON only.";
}

std::vector<std::string> describe(const std::vector<CitationViolation>& violations) {
    std::vector<std::string> out;
    out.reserve(violations.size());
    for (const auto& v : violations) out.push_back(v.describe());
    return out;
}

template <class T>
struct JsonStage {
    std::string tag;
    std::string subject;
    std::function<Validated<T>(const Json&, Strictness)> validate;
    std::function<std::vector<std::string>(const T&)> citations;
};

using CallFn = std::function<ChatResponse(const std::string& prompt, const std::string& tag)>;

template <class T>
T run_json_stage(const Query& query, const std::string& prompt, const JsonStage<T>& stage, const CallFn& call,
                 const PipelineOptions& options, StageLog& log) {
    const bool lenient = options.strictness == Strictness::lenient;
    const int attempts = lenient ? 1 : 1 + std::max(0, options.validation_retries);
    const auto stage_name = stage.tag.substr(0, stage.tag.find(':'));
    std::optional<Json> last_json;
    std::vector<std::string> violations;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const auto text = call(attempt == 0 ? prompt : prompt + corrective_suffix(violations), stage.tag).text;
        Json parsed;
        try {
            parsed = extract_json(text);
        } catch (const JsonExtractError&) {
            violations = {"response contained no JSON object"};
            continue;
        }
        last_json = parsed;
        if (lenient) break;
        auto checked = stage.validate(parsed, Strictness::strict);
        if (!checked.ok()) {
            violations = std::move(checked.violations);
            continue;
        }
        violations = stage.citations(*checked.value);
        if (violations.empty()) return std::move(*checked.value);
    }
    if (!last_json) throw StageError(query.id, stage_name, stage.subject, attempts, join(violations, "; "));
    auto coerced = stage.validate(*last_json, Strictness::lenient);
    if (!coerced.value) {
        throw StageError(query.id, stage_name, stage.subject, attempts, join(coerced.violations, "; "));
    }
    auto all = std::move(coerced.violations);
    for (auto& c : stage.citations(*coerced.value)) all.push_back(std::move(c));
    const auto prefix = stage_name + (stage.subject.empty() ? "" : " (" + stage.subject + ")") + ": ";
    for (const auto& v : all) log.warnings.push_back(prefix + v);
    return std::move(*coerced.value);
}

template <class T>
Json opt_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> opt_from(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

std::array<EntityRef, 2> refs_of(const FilteredAspects& f) { return {f.entities[0].entity, f.entities[1].entity}; }

}  // namespace

// ---- variants -----------------------------------------------------------------

std::string_view to_string(VariantKind v) {
    switch (v) {
        case VariantKind::base: return "base";
        case VariantKind::contrastive: return "contrastive";
        case VariantKind::debate: return "debate";
    }
    return "base";
}

VariantKind parse_variant_kind(std::string_view s) {
    if (s == "base") return VariantKind::base;
    if (s == "contrastive") return VariantKind::contrastive;
    if (s == "debate") return VariantKind::debate;
    throw ConfigError("unknown variant '" + std::string(s) + "' (expected base, contrastive or debate)");
}

Variant Variant::make(VariantKind kind, Tone tone) {
    if (kind != VariantKind::debate && tone != Tone::standard) {
        throw ConfigError("tone applies only to the debate variant");
    }
    return Variant{kind, tone};
}

std::string Variant::label() const {
    std::string out(to_string(kind));
    if (kind == VariantKind::debate && tone != Tone::standard) {
        out += '-';
        out += to_string(tone);
    }
    return out;
}

Variant Variant::parse_label(std::string_view label) {
    const auto dash = label.find('-');
    if (dash == std::string_view::npos) return make(parse_variant_kind(label));
    Tone tone;
    try {
        tone = parse_tone(label.substr(dash + 1));
    } catch (const Error&) {
        throw ConfigError("unknown variant label '" + std::string(label) + "'");
    }
    return make(parse_variant_kind(label.substr(0, dash)), tone);
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::complete: return "complete";
        case RunStatus::partial: return "partial";
        case RunStatus::failed: return "failed";
    }
    return "failed";
}

RunStatus parse_run_status(std::string_view s) {
    if (s == "complete") return RunStatus::complete;
    if (s == "partial") return RunStatus::partial;
    if (s == "failed") return RunStatus::failed;
    throw Error("unknown run status '" + std::string(s) + "'");
}

void to_json(Json& j, const Variant& v) {
    j = Json{{"kind", to_string(v.kind)}, {"tone", to_string(v.tone)}};
}

void from_json(const Json& j, Variant& v) {
    v = Variant::make(parse_variant_kind(j.at("kind").get<std::string>()),
                      parse_tone(j.at("tone").get<std::string>()));
}

void to_json(Json& j, const DebateRound& v) {
    j = Json{{"aspect", v.aspect},
             {"transcript", opt_json(v.transcript)},
             {"summary", opt_json(v.summary)},
             {"error", v.error}};
}

void from_json(const Json& j, DebateRound& v) {
    v.aspect = j.at("aspect").get<std::string>();
    v.transcript = opt_from<DebateTranscript>(j, "transcript");
    v.summary = opt_from<DebateSummary>(j, "summary");
    v.error = j.value("error", std::string());
}

void to_json(Json& j, const RunRecord& v) {
    j = Json{{"query", v.query},
             {"variant", v.variant},
             {"pair", Json::array({v.pair[0], v.pair[1]})},
             {"extractions", Json::array({opt_json(v.extractions[0]), opt_json(v.extractions[1])})},
             {"merge_map", opt_json(v.merge_map)},
             {"filtered", opt_json(v.filtered)},
             {"debates", v.debates},
             {"summary", opt_json(v.summary)},
             {"tokens", v.tokens},
             {"warnings", v.warnings},
             {"status", to_string(v.status)},
             {"error", v.error}};
}

void from_json(const Json& j, RunRecord& v) {
    v.query = j.at("query").get<Query>();
    v.variant = j.at("variant").get<Variant>();
    const auto& pair = j.at("pair");
    if (!pair.is_array() || pair.size() != 2) throw Error("run record pair must have two entities");
    v.pair = {pair[0].get<EntityRef>(), pair[1].get<EntityRef>()};
    const auto& ex = j.at("extractions");
    if (!ex.is_array() || ex.size() != 2) throw Error("run record must have two extraction slots");
    for (std::size_t i = 0; i < 2; ++i) {
        v.extractions[i] = ex[i].is_null() ? std::nullopt : std::optional(ex[i].get<AspectExtraction>());
    }
    v.merge_map = opt_from<AspectMergeMap>(j, "merge_map");
    v.filtered = opt_from<FilteredAspects>(j, "filtered");
    v.debates = j.at("debates").get<std::vector<DebateRound>>();
    v.summary = opt_from<ContrastiveSummary>(j, "summary");
    v.tokens = j.at("tokens").get<TokenUsage>();
    v.warnings = j.at("warnings").get<std::vector<std::string>>();
    v.status = parse_run_status(j.at("status").get<std::string>());
    v.error = j.value("error", std::string());
}

// ---- merge application --------------------------------------------------------

AspectExtraction apply_merge_map(const AspectExtraction& extraction, const AspectMergeMap& map) {
    const AspectMergeMap::EntityMap* entity_map = nullptr;
    for (const auto& m : map.entities) {
        if (m.entity.id == extraction.entity.id) entity_map = &m;
    }
    if (entity_map == nullptr) throw Error("merge map has no entry for entity " + extraction.entity.id);

    std::vector<std::string> domain, names = extraction.aspect_names();
    for (const auto& [from, to] : entity_map->renames) domain.push_back(from);
    auto sorted_domain = domain, sorted_names = names;
    std::sort(sorted_domain.begin(), sorted_domain.end());
    std::sort(sorted_names.begin(), sorted_names.end());
    if (sorted_domain != sorted_names) {
        throw Error("merge map domain does not match the aspects of " + extraction.entity.id);
    }

    AspectExtraction out;
    out.entity = extraction.entity;
    for (const auto& aspect : extraction.aspects) {
        const auto target = *entity_map->lookup(aspect.name);
        auto it = std::find_if(out.aspects.begin(), out.aspects.end(), [&](const Aspect& a) { return a.name == target; });
        if (it == out.aspects.end()) {
            out.aspects.push_back(Aspect{target, aspect.phrases});
        } else {
            it->phrases.insert(it->phrases.end(), aspect.phrases.begin(), aspect.phrases.end());
        }
    }
    return out;
}

// ---- stages -------------------------------------------------------------------

Pipeline::Pipeline(Gateway& gateway, PipelineOptions options, const ArtifactStore* store)
    : gateway_(gateway), options_(std::move(options)), store_(store) {
    if (!gateway_.knows(options_.model_id)) throw ConfigError("unknown model id '" + options_.model_id + "'");
}

ChatResponse Pipeline::call(const std::string& prompt, const std::string& tag, StageLog& log) const {
    ChatRequest request{options_.model_id, prompt, options_.temperature, options_.max_tokens, tag};
    auto response = gateway_.complete(request);
    log.tokens += response.usage;
    return response;
}

AspectExtraction Pipeline::run_aspect_extraction(const SnippetSet& entity, const Query& query, StageLog& log) const {
    const EntityRef ref{entity.entity_id, entity.entity_name};
    const std::array<SnippetSet, 1> sources = {entity};
    JsonStage<AspectExtraction> stage{
        "aspect_extraction", entity.entity_id,
        [&](const Json& j, Strictness s) { return validate_extraction(j, ref, s); },
        [&](const AspectExtraction& x) { return describe(validate_citations(x, sources)); }};
    CallFn fn = [&](const std::string& p, const std::string& t) { return call(p, t, log); };
    return run_json_stage(query, render_aspect_extraction(entity, query), stage, fn, options_, log);
}

AspectMergeMap Pipeline::run_aspect_merge(const AspectExtraction& a, const AspectExtraction& b, const Query& query,
                                          StageLog& log) const {
    JsonStage<AspectMergeMap> stage{
        "aspect_merge", "",
        [&](const Json& j, Strictness s) { return validate_merge_map(j, a, b, s); },
        [](const AspectMergeMap&) { return std::vector<std::string>{}; }};
    CallFn fn = [&](const std::string& p, const std::string& t) { return call(p, t, log); };
    const auto prompt = render_aspect_merge(AspectList{a.entity.name, a.aspect_names()},
                                            AspectList{b.entity.name, b.aspect_names()}, query);
    return run_json_stage(query, prompt, stage, fn, options_, log);
}

FilteredAspects Pipeline::run_filter(const AspectExtraction& a, const AspectExtraction& b, const Query& query,
                                     std::span<const SnippetSet> sources, StageLog& log) const {
    JsonStage<FilteredAspects> stage{
        "filter", "",
        [&](const Json& j, Strictness s) { return validate_filtered(j, a.entity, b.entity, s); },
        [&](const FilteredAspects& x) { return describe(validate_citations(x, sources)); }};
    CallFn fn = [&](const std::string& p, const std::string& t) { return call(p, t, log); };
    return run_json_stage(query, render_filter(entity_block(a), entity_block(b), query), stage, fn, options_, log);
}

ContrastiveSummary Pipeline::run_summary(const FilteredAspects& filtered, const Query& query, SummaryFlavor flavor,
                                         std::span<const SnippetSet> sources, StageLog& log) const {
    const auto refs = refs_of(filtered);
    JsonStage<ContrastiveSummary> stage{
        "summary:" + std::string(to_string(flavor)), "",
        [&](const Json& j, Strictness s) { return validate_summary(j, refs[0], refs[1], s); },
        [&](const ContrastiveSummary& x) { return describe(validate_citations(x, sources)); }};
    CallFn fn = [&](const std::string& p, const std::string& t) { return call(p, t, log); };
    const auto prompt =
        render_summary(flavor, entity_block(filtered.entities[0]), entity_block(filtered.entities[1]), query);
    return run_json_stage(query, prompt, stage, fn, options_, log);
}

DebateTranscript Pipeline::run_debate_transcript(const FilteredAspects& filtered, std::string_view aspect,
                                                 const Query& query, Tone tone, StageLog& log) const {
    const auto prompt = render_debate(debate_side(filtered.entities[0], aspect),
                                      debate_side(filtered.entities[1], aspect), aspect, query, tone);
    const auto tag = "debate:" + std::string(aspect);
    const bool lenient = options_.strictness == Strictness::lenient;
    const int attempts = lenient ? 1 : 1 + std::max(0, options_.validation_retries);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const auto text = call(attempt == 0 ? prompt : prompt + corrective_suffix({"the debate was empty"}), tag, log).text;
        if (!trim(text).empty()) {
            return DebateTranscript{query.id,
                                    std::string(aspect),
                                    {filtered.entities[0].entity.id, filtered.entities[1].entity.id},
                                    tone,
                                    text};
        }
    }
    throw StageError(query.id, "debate", std::string(aspect), attempts, "the debate was empty");
}

DebateSummary Pipeline::run_debate_summary(const FilteredAspects& filtered, const DebateTranscript& debate,
                                           const Query& query, std::span<const SnippetSet> sources,
                                           StageLog& log) const {
    const auto refs = refs_of(filtered);
    const auto& aspect = debate.aspect_name;
    JsonStage<DebateSummary> stage{
        "debate_summary:" + aspect, aspect,
        [&](const Json& j, Strictness s) { return validate_debate_summary(j, aspect, refs[0], refs[1], s); },
        [&](const DebateSummary& x) { return describe(validate_citations(x, sources)); }};
    CallFn fn = [&](const std::string& p, const std::string& t) { return call(p, t, log); };
    const auto prompt = render_debate_summary(debate_side(filtered.entities[0], aspect),
                                              debate_side(filtered.entities[1], aspect), aspect, query, debate.text);
    return run_json_stage(query, prompt, stage, fn, options_, log);
}

std::vector<DebateRound> Pipeline::run_debate(const FilteredAspects& filtered, const Query& query, Tone tone,
                                              std::span<const SnippetSet> sources, StageLog& log) const {
    std::vector<DebateRound> rounds;
    for (const auto& aspect : filtered.entities[0].aspect_names()) {
        DebateRound round{aspect, std::nullopt, std::nullopt, {}};
        try {
            round.transcript = run_debate_transcript(filtered, aspect, query, tone, log);
            round.summary = run_debate_summary(filtered, *round.transcript, query, sources, log);
        } catch (const Error& e) {
            round.error = e.what();
        }
        rounds.push_back(std::move(round));
    }
    return rounds;
}

ContrastiveSummary Pipeline::run_debate_final_summary(const std::vector<DebateRound>& rounds, const Query& query,
                                                      std::span<const SnippetSet> sources, StageLog& log) const {
    if (rounds.empty()) throw StageError(query.id, "summary", "", 0, "no debate summaries to summarize");
    std::array<EntityBlock, 2> blocks;
    for (std::size_t i = 0; i < 2; ++i) {
        blocks[i].attributes = Json::object();
        for (const auto& round : rounds) {
            if (!round.summary) throw StageError(query.id, "summary", round.aspect, 0, "debate summary missing");
            const auto& side = round.summary->entities[i];
            blocks[i].name = side.entity.name;
            blocks[i].attributes[round.aspect] = side.text;
        }
    }
    const std::array<EntityRef, 2> refs = {rounds.front().summary->entities[0].entity,
                                           rounds.front().summary->entities[1].entity};
    JsonStage<ContrastiveSummary> stage{
        "summary:debate", "",
        [&](const Json& j, Strictness s) { return validate_summary(j, refs[0], refs[1], s); },
        [&](const ContrastiveSummary& x) { return describe(validate_citations(x, sources)); }};
    CallFn fn = [&](const std::string& p, const std::string& t) { return call(p, t, log); };
    return run_json_stage(query, render_contrastive(blocks[0], blocks[1], query), stage, fn, options_, log);
}

RunRecord Pipeline::run_variant(const Query& query, const std::array<SnippetSet, 2>& pair,
                                const Variant& variant) const {
    RunRecord record;
    record.query = query;
    record.variant = variant;
    record.pair = {EntityRef{pair[0].entity_id, pair[0].entity_name}, EntityRef{pair[1].entity_id, pair[1].entity_name}};
    const auto label = variant.label();
    auto persist = [&](std::string_view stage, const Json& value, std::string_view slug = {}) {
        if (store_ != nullptr) store_->write(query.id, label, stage, value, slug);
    };
    const std::span<const SnippetSet> sources(pair);
    StageLog log;
    try {
        for (std::size_t i = 0; i < 2; ++i) {
            if (auto problem = check_snippet_set(pair[i])) {
                throw StageError(query.id, "aspect_extraction", pair[i].entity_id, 0, *problem);
            }
            record.extractions[i] = run_aspect_extraction(pair[i], query, log);
            persist("aspect_extraction", *record.extractions[i], slugify(pair[i].entity_id));
        }
        record.merge_map = run_aspect_merge(*record.extractions[0], *record.extractions[1], query, log);
        persist("aspect_merge", *record.merge_map);
        const auto merged_a = apply_merge_map(*record.extractions[0], *record.merge_map);
        const auto merged_b = apply_merge_map(*record.extractions[1], *record.merge_map);
        record.filtered = run_filter(merged_a, merged_b, query, sources, log);
        persist("filter", *record.filtered);

        if (variant.kind == VariantKind::debate) {
            record.debates = run_debate(*record.filtered, query, variant.tone, sources, log);
            std::size_t failed = 0;
            for (std::size_t i = 0; i < record.debates.size(); ++i) {
                const auto& round = record.debates[i];
                const auto slug = std::to_string(i + 1) + "-" + slugify(round.aspect);
                if (round.transcript) persist("debate", *round.transcript, slug);
                if (round.summary) persist("debate_summary", *round.summary, slug);
                if (!round.error.empty()) {
                    ++failed;
                    log.warnings.push_back(round.error);
                }
            }
            if (failed > 0) {
                record.status = RunStatus::partial;
                record.error = std::to_string(failed) + " of " + std::to_string(record.debates.size()) +
                               " debate aspects failed; final summary skipped";
            } else {
                record.summary = run_debate_final_summary(record.debates, query, sources, log);
            }
        } else {
            const auto flavor = variant.kind == VariantKind::base ? SummaryFlavor::base : SummaryFlavor::contrastive;
            record.summary = run_summary(*record.filtered, query, flavor, sources, log);
        }
        if (record.summary) {
            persist("summary", *record.summary);
            record.status = RunStatus::complete;
        }
    } catch (const std::exception& e) {
        record.status = RunStatus::failed;
        record.error = e.what();
    }
    record.tokens = log.tokens;
    record.warnings = std::move(log.warnings);
    persist("record", record);
    return record;
}

std::vector<RunRecord> run_batch(const Pipeline& pipeline, std::span<const RankedQuery> queries,
                                 const Variant& variant, std::size_t parallel) {
    std::vector<RunRecord> out(queries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) {
            out[i] = pipeline.run_variant(queries[i].query, queries[i].pair, variant);
        }
    };
    const auto n = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(queries.size(), 1));
    if (n == 1) {
        worker();
        return out;
    }
    {
        std::vector<std::jthread> threads;
        for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    }
    return out;
}

Json build_manifest(const Json& config, const PipelineOptions& options, const Variant& variant,
                    std::span<const RunRecord> records) {
    Json templates = Json::object();
    for (auto kind : kPromptKinds) templates[std::string(to_string(kind))] = template_hash(kind);
    TokenUsage total;
    Json queries = Json::array();
    std::map<std::string, long> status = {{"complete", 0}, {"partial", 0}, {"failed", 0}};
    for (const auto& r : records) {
        total += r.tokens;
        queries.push_back(r.query.id);
        ++status[std::string(to_string(r.status))];
    }
    return Json{{"config", config},
                {"variant", variant},
                {"model_id", options.model_id},
                {"temperature", options.temperature},
                {"max_tokens", options.max_tokens},
                {"strictness", to_string(options.strictness)},
                {"validation_retries", options.validation_retries},
                {"templates", std::move(templates)},
                {"queries", std::move(queries)},
                {"status", Json{{"complete", status["complete"]}, {"partial", status["partial"]}, {"failed", status["failed"]}}},
                {"tokens", total}};
}

}  // namespace qstrum

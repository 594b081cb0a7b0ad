#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <mutex>

#include "qstrum/artifact_store.hpp"
#include "qstrum/errors.hpp"
#include "qstrum/json_extract.hpp"
#include "qstrum/pipeline.hpp"
#include "test_support.hpp"

namespace qstrum {
namespace {

/// Answers through a callback and keeps every request it saw.
class FnBackend : public ChatBackend {
public:
    using Fn = std::function<std::string(const ChatRequest&, int call_index)>;
    explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}

    ChatResponse complete(const ChatRequest& request) override {
        int index;
        {
            std::lock_guard lock(mu_);
            index = static_cast<int>(requests.size());
            requests.push_back(request);
        }
        return ChatResponse{fn_(request, index), {1, 1}, false, "fn"};
    }
    std::string id() const override { return "fn"; }

    std::vector<ChatRequest> tagged(std::string_view prefix) const {
        std::vector<ChatRequest> out;
        for (const auto& r : requests) {
            if (r.request_tag.rfind(prefix, 0) == 0) out.push_back(r);
        }
        return out;
    }

    std::vector<ChatRequest> requests;

private:
    std::mutex mu_;
    Fn fn_;
};

std::string synth(const ChatRequest& r) { return synthesize_response(r); }

struct Harness {
    explicit Harness(FnBackend::Fn fn = [](const ChatRequest& r, int) { return synth(r); }) {
        Gateway::Options options;
        options.sleep = testing::no_sleep();
        gateway = std::make_unique<Gateway>(options);
        backend = std::make_shared<FnBackend>(std::move(fn));
        gateway->register_model("fn", backend);
    }

    Pipeline pipeline(Strictness strictness = Strictness::strict, const ArtifactStore* store = nullptr) const {
        PipelineOptions o;
        o.model_id = "fn";
        o.strictness = strictness;
        return Pipeline(*gateway, o, store);
    }

    std::unique_ptr<Gateway> gateway;
    std::shared_ptr<FnBackend> backend;
};

AspectExtraction extraction_of(const std::string& id, const std::vector<std::pair<std::string, std::size_t>>& shape) {
    AspectExtraction x;
    x.entity = EntityRef{id, id};
    int n = 1;
    for (const auto& [name, count] : shape) {
        Aspect a{name, {}};
        for (std::size_t i = 0; i < count; ++i) a.phrases.push_back(CitedPhrase::from_text(name + " [" + std::to_string(n++) + "]"));
        x.aspects.push_back(std::move(a));
    }
    return x;
}

AspectMergeMap map_for(const AspectExtraction& a, const std::vector<std::pair<std::string, std::string>>& renames,
                       const AspectExtraction& b) {
    AspectMergeMap m;
    m.entities[0] = {a.entity, renames};
    for (const auto& x : b.aspects) m.entities[1].renames.emplace_back(x.name, x.name);
    m.entities[1].entity = b.entity;
    return m;
}

AspectExtraction other_entity() { return extraction_of("b", {{"nightlife", 1}}); }

TEST(MergeMap, IdentityLeavesExtractionUnchanged) {
    const auto a = extraction_of("a", {{"food", 2}, {"views", 3}});
    const auto m = map_for(a, {{"food", "food"}, {"views", "views"}}, other_entity());
    EXPECT_EQ(apply_merge_map(a, m), a);
}

TEST(MergeMap, ConcatenatesInOrder) {
    const auto a = extraction_of("a", {{"food scene", 3}, {"views", 1}, {"culinary culture", 4}});
    const auto m = map_for(a, {{"food scene", "cuisine"}, {"views", "views"}, {"culinary culture", "cuisine"}}, other_entity());
    const auto merged = apply_merge_map(a, m);
    ASSERT_EQ(merged.aspects.size(), 2u);
    EXPECT_EQ(merged.aspects[0].name, "cuisine");
    // Oracle: phrases of the two old aspects, old-name order then phrase order.
    std::vector<CitedPhrase> expected = a.aspects[0].phrases;
    expected.insert(expected.end(), a.aspects[2].phrases.begin(), a.aspects[2].phrases.end());
    EXPECT_EQ(merged.aspects[0].phrases, expected);
    EXPECT_EQ(merged.aspects[0].phrases.size(), 7u);
    EXPECT_EQ(merged.aspect_names(), (std::vector<std::string>{"cuisine", "views"}));
}

TEST(MergeMap, BijectiveRename) {
    const auto a = extraction_of("a", {{"a1", 1}, {"a2", 1}, {"a3", 1}, {"a4", 1}, {"a5", 1}});
    const auto m = map_for(a, {{"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}, {"a4", "b4"}, {"a5", "b5"}}, other_entity());
    const auto merged = apply_merge_map(a, m);
    EXPECT_EQ(merged.aspect_names(), (std::vector<std::string>{"b1", "b2", "b3", "b4", "b5"}));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(merged.aspects[i].phrases, a.aspects[i].phrases);
}

TEST(MergeMap, DomainMismatchThrows) {
    const auto a = extraction_of("a", {{"food", 1}, {"views", 1}});
    EXPECT_THROW(apply_merge_map(a, map_for(a, {{"food", "food"}}, other_entity())), Error);
}

TEST(VariantTest, LabelsRoundTrip) {
    for (const auto& v : {Variant::make(VariantKind::base), Variant::make(VariantKind::contrastive),
                          Variant::make(VariantKind::debate), Variant::make(VariantKind::debate, Tone::nice),
                          Variant::make(VariantKind::debate, Tone::aggressive)}) {
        EXPECT_EQ(Variant::parse_label(v.label()), v);
    }
    EXPECT_EQ(Variant::make(VariantKind::debate, Tone::nice).label(), "debate-nice");
    EXPECT_THROW(Variant::make(VariantKind::base, Tone::nice), ConfigError);
    EXPECT_THROW(Variant::parse_label("debate-rude"), ConfigError);
    EXPECT_THROW(Variant::parse_label("chat"), ConfigError);
}

TEST(PipelineTest, UnknownModelIsConfigError) {
    auto gw = testing::mock_gateway();
    PipelineOptions o;
    o.model_id = "nope";
    EXPECT_THROW(Pipeline(*gw, o), ConfigError);
}

TEST(PipelineTest, ExtractionFromMockIsStrictValid) {
    Harness h;
    const auto rq = testing::synthetic_ranked_queries(1).front();
    StageLog log;
    const auto x = h.pipeline().run_aspect_extraction(rq.pair[0], rq.query, log);
    EXPECT_EQ(x.aspects.size(), 5u);
    for (const auto& a : x.aspects) EXPECT_GE(a.phrases.size(), 10u);
    EXPECT_TRUE(log.warnings.empty());
    EXPECT_EQ(h.backend->requests.size(), 1u);
}

TEST(PipelineTest, ScriptedExtractionForFoodQuery) {
    const std::string fixture = R"(```json
{
  "street food scene": ["Street food stalls line the Spaccanapoli [2]"],
  "pizza culture": ["Naples is the birthplace of pizza [1]"]
}
```)";
    Harness h([&](const ChatRequest&, int) { return fixture; });
    const auto q = testing::make_query("q-food", "culinary cities for food lovers");
    const SnippetSet naples{"naples",
                            "Naples",
                            {{"naples", 1, "Naples is the birthplace of pizza."},
                             {"naples", 2, "Street food stalls line the Spaccanapoli."},
                             {"naples", 3, "Some districts feel crowded at night."}}};
    StageLog log;
    const auto x = h.pipeline(Strictness::lenient).run_aspect_extraction(naples, q, log);
    ASSERT_GE(x.aspects.size(), 1u);
    EXPECT_EQ(x.aspects[0].name, "street food scene");
    EXPECT_EQ(x.aspects[0].phrases[0].citations, (std::vector<int>{2}));
    EXPECT_FALSE(log.warnings.empty());
    EXPECT_EQ(h.backend->requests.size(), 1u);
    EXPECT_NE(h.backend->requests[0].prompt.find("culinary cities for food lovers"), std::string::npos);
}

TEST(PipelineTest, ProseOnlyIsStageError) {
    Harness h([](const ChatRequest&, int) { return std::string("I would rather not answer in JSON."); });
    const auto rq = testing::synthetic_ranked_queries(1).front();
    StageLog log;
    try {
        h.pipeline().run_aspect_extraction(rq.pair[0], rq.query, log);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "aspect_extraction");
        EXPECT_EQ(e.attempts(), 3);
    }
    EXPECT_EQ(h.backend->requests.size(), 3u);
}

TEST(PipelineTest, RejectedOutputIsRetriedWithCorrection) {
    // First filter answer has a phrase missing; the retry gets the synthesized answer.
    Harness h([](const ChatRequest& r, int) {
        auto text = synth(r);
        if (r.request_tag == "filter" && r.prompt.find("previous answer was rejected") == std::string::npos) {
            auto j = extract_json(text);
            auto& first = j.begin().value();
            first.begin().value().erase(0);
            return j.dump();
        }
        return text;
    });
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::base));
    EXPECT_EQ(record.status, RunStatus::complete) << record.error;
    const auto filters = h.backend->tagged("filter");
    ASSERT_EQ(filters.size(), 2u);
    EXPECT_EQ(filters[1].prompt.rfind(filters[0].prompt, 0), 0u);
    EXPECT_NE(filters[1].prompt.find("expected 10 phrases, got 9"), std::string::npos);
    EXPECT_NE(filters[1].prompt.find("Reply again with the corrected JSON only."), std::string::npos);
    EXPECT_TRUE(record.warnings.empty());
}

TEST(PipelineTest, ExhaustedRetriesCoerceWithWarnings) {
    Harness h([](const ChatRequest& r, int) {
        auto text = synth(r);
        if (r.request_tag == "filter") {
            auto j = extract_json(text);
            j.begin().value().begin().value().erase(0);
            return j.dump();
        }
        return text;
    });
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::base));
    EXPECT_EQ(h.backend->tagged("filter").size(), 3u);
    ASSERT_FALSE(record.warnings.empty());
    EXPECT_EQ(record.warnings[0].rfind("filter: ", 0), 0u);
    EXPECT_EQ(record.status, RunStatus::complete);
}

TEST(PipelineTest, LenientModeAcceptsFirstAnswer) {
    Harness h([](const ChatRequest& r, int) {
        auto text = synth(r);
        if (r.request_tag == "filter") {
            auto j = extract_json(text);
            j.begin().value().begin().value().erase(0);
            return j.dump();
        }
        return text;
    });
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline(Strictness::lenient).run_variant(rq.query, rq.pair, Variant::make(VariantKind::base));
    EXPECT_EQ(h.backend->tagged("filter").size(), 1u);
    EXPECT_EQ(record.status, RunStatus::complete);
    EXPECT_FALSE(record.warnings.empty());
}

TEST(PipelineTest, DebaterMentionTriggersRetry) {
    Harness h([](const ChatRequest& r, int) {
        auto text = synth(r);
        if (r.request_tag.rfind("debate_summary:", 0) == 0 && r.prompt.find("previous answer") == std::string::npos) {
            auto j = extract_json(text);
            auto& v = j.begin().value();
            v = "Alice argued that " + v.get<std::string>();
            return j.dump();
        }
        return text;
    });
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::debate));
    EXPECT_EQ(record.status, RunStatus::complete) << record.error;
    const auto sums = h.backend->tagged("debate_summary:");
    ASSERT_EQ(sums.size(), 6u);
    EXPECT_NE(sums[1].prompt.find("mentions Alice or Bob"), std::string::npos);
    for (const auto& round : record.debates) EXPECT_FALSE(mentions_debaters(round.summary->entities[0].text));
}

TEST(PipelineTest, BaseVariantHasNoDebates) {
    Harness h;
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::base));
    EXPECT_EQ(record.status, RunStatus::complete);
    EXPECT_TRUE(record.debates.empty());
    EXPECT_TRUE(h.backend->tagged("debate").empty());
    ASSERT_EQ(h.backend->tagged("summary:").size(), 1u);
    EXPECT_EQ(h.backend->tagged("summary:")[0].request_tag, "summary:base");
}

TEST(PipelineTest, DebateVariantShape) {
    Harness h;
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::debate));
    ASSERT_EQ(record.status, RunStatus::complete) << record.error;
    ASSERT_EQ(record.debates.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& round = record.debates[i];
        EXPECT_EQ(round.aspect, record.filtered->entities[0].aspects[i].name);
        ASSERT_TRUE(round.transcript);
        ASSERT_TRUE(round.summary);
        EXPECT_TRUE(round.error.empty());
        EXPECT_TRUE(validate_citations(*round.summary, rq.pair).empty());
    }
    ASSERT_TRUE(record.summary);
    EXPECT_TRUE(validate_citations(*record.summary, rq.pair).empty());
    EXPECT_EQ(h.backend->tagged("summary:").back().request_tag, "summary:debate");
    // The final summarizer sees the debate summaries rather than the filtered phrases.
    const auto& final_prompt = h.backend->tagged("summary:debate").front().prompt;
    EXPECT_NE(final_prompt.find(record.debates[0].summary->entities[0].text.substr(0, 30)), std::string::npos);
}

TEST(PipelineTest, ToneChangesTranscriptNotSchema) {
    Harness h;
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto standard = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::debate));
    const auto aggressive =
        h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::debate, Tone::aggressive));
    ASSERT_EQ(standard.debates.size(), aggressive.debates.size());
    for (std::size_t i = 0; i < standard.debates.size(); ++i) {
        EXPECT_NE(standard.debates[i].transcript->text, aggressive.debates[i].transcript->text);
        EXPECT_EQ(aggressive.debates[i].transcript->tone, Tone::aggressive);
        EXPECT_EQ(standard.debates[i].summary->aspect_name, aggressive.debates[i].summary->aspect_name);
    }
    ASSERT_TRUE(aggressive.summary);
    EXPECT_EQ(aggressive.summary->entities[0].aspect_names(), standard.summary->entities[0].aspect_names());
}

TEST(PipelineTest, FailedDebateAspectMakesRunPartial) {
    std::string victim;
    Harness h([&](const ChatRequest& r, int) {
        if (r.request_tag.rfind("debate:", 0) == 0) {
            if (victim.empty()) victim = r.request_tag;
            if (r.request_tag == victim) return std::string("   ");
        }
        return synth(r);
    });
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::debate));
    EXPECT_EQ(record.status, RunStatus::partial);
    EXPECT_FALSE(record.summary);
    ASSERT_EQ(record.debates.size(), 3u);
    EXPECT_FALSE(record.debates[0].error.empty());
    EXPECT_FALSE(record.debates[0].transcript);
    EXPECT_TRUE(record.debates[1].summary);
    EXPECT_TRUE(record.debates[2].summary);
    EXPECT_TRUE(h.backend->tagged("summary:").empty());
}

TEST(PipelineTest, InvalidSnippetSetFailsRun) {
    Harness h;
    auto rq = testing::synthetic_ranked_queries(1).front();
    rq.pair[1].snippets[3].index = 9;
    const auto record = h.pipeline().run_variant(rq.query, rq.pair, Variant::make(VariantKind::base));
    EXPECT_EQ(record.status, RunStatus::failed);
    EXPECT_FALSE(record.error.empty());
}

TEST(PipelineTest, ArtifactsAndRecordRoundTrip) {
    testing::TempDir dir;
    const ArtifactStore store(dir.path());
    Harness h;
    const auto rq = testing::synthetic_ranked_queries(1).front();
    const auto record = h.pipeline(Strictness::strict, &store).run_variant(rq.query, rq.pair, Variant::make(VariantKind::debate));
    const auto base = dir.path() / "q1" / "debate";
    for (const auto* f : {"aspect_merge.json", "filter.json", "summary.json", "record.json"}) {
        EXPECT_TRUE(std::filesystem::exists(base / f)) << f;
    }
    EXPECT_TRUE(std::filesystem::exists(base / ("aspect_extraction." + slugify(rq.pair[0].entity_id) + ".json")));
    std::size_t debates = 0;
    for (const auto& e : std::filesystem::directory_iterator(base)) {
        debates += e.path().filename().string().rfind("debate_summary.", 0) == 0 ? 1 : 0;
    }
    EXPECT_EQ(debates, 3u);
    const auto stored = store.read("q1", "debate", "record");
    ASSERT_TRUE(stored);
    EXPECT_EQ(stored->get<RunRecord>(), record);
    EXPECT_EQ(canonical_dump(Json(stored->get<RunRecord>())), canonical_dump(*stored));
}

TEST(PipelineTest, BatchIsDeterministicAndOrdered) {
    Harness h;
    const auto queries = testing::synthetic_ranked_queries(4);
    const auto p = h.pipeline();
    const auto serial = run_batch(p, queries, Variant::make(VariantKind::contrastive), 1);
    const auto parallel = run_batch(p, queries, Variant::make(VariantKind::contrastive), 3);
    ASSERT_EQ(serial.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(serial[i].query.id, queries[i].query.id);
    EXPECT_EQ(serial, parallel);
}

TEST(PipelineTest, ManifestSummarizesRecords) {
    Harness h;
    const auto queries = testing::synthetic_ranked_queries(2);
    const auto records = run_batch(h.pipeline(), queries, Variant::make(VariantKind::base));
    PipelineOptions o;
    o.model_id = "fn";
    const auto m = build_manifest(Json{{"k", 1}}, o, Variant::make(VariantKind::base), records);
    EXPECT_EQ(m["status"]["complete"], 2);
    EXPECT_EQ(m["queries"], Json::array({"q1", "q2"}));
    EXPECT_EQ(m["templates"].size(), kPromptKinds.size());
    EXPECT_EQ(m["tokens"]["prompt_tokens"], records[0].tokens.prompt_tokens + records[1].tokens.prompt_tokens);
}

TEST(ArtifactStoreTest, PathsAreSafeAndDistinct) {
    testing::TempDir dir;
    const ArtifactStore store(dir.path());
    EXPECT_EQ(path_component("../etc"), ".._etc");
    EXPECT_EQ(path_component(".."), "_..");
    EXPECT_EQ(path_component(""), "_");
    EXPECT_EQ(slugify("Street Food / Scene!"), "street-food-scene");
    EXPECT_EQ(slugify("!!!"), "x");
    EXPECT_NE(store.path_for("q", "base", "debate", "1-food"), store.path_for("q", "base", "debate", "2-food"));
    store.write("q/1", "base", "filter", Json{{"a", 1}});
    EXPECT_EQ(store.read("q/1", "base", "filter")->at("a"), 1);
    EXPECT_FALSE(store.read("q/1", "base", "summary"));
    EXPECT_TRUE(store.path_for("q/1", "base", "filter").parent_path().parent_path().parent_path() == dir.path());
}

}  // namespace
}  // namespace qstrum

#include <benchmark/benchmark.h>

#include <random>

#include "qstrum/bootstrap.hpp"
#include "qstrum/json_extract.hpp"
#include "qstrum/prompts.hpp"
#include "qstrum/retrieval.hpp"

namespace {

using namespace qstrum;

std::vector<EntityCorpus> random_corpus(std::size_t entities, std::size_t snippets, std::size_t dim) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<EntityCorpus> corpus;
    for (std::size_t e = 0; e < entities; ++e) {
        EntityCorpus c{"e" + std::to_string(e), {}};
        for (std::size_t i = 0; i < snippets; ++i) {
            EmbeddingVector v;
            for (std::size_t d = 0; d < dim; ++d) v.values.push_back(g(rng));
            c.snippet_vectors.push_back(std::move(v));
        }
        corpus.push_back(std::move(c));
    }
    return corpus;
}

void BM_RankEntities(benchmark::State& state) {
    const auto entities = static_cast<std::size_t>(state.range(0));
    const auto corpus = random_corpus(entities, 160, 64);
    const auto query = corpus[0].snippet_vectors[0];
    for (auto _ : state) benchmark::DoNotOptimize(rank_entities(query, corpus, 50));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(entities) * 160);
}
BENCHMARK(BM_RankEntities)->Arg(50)->Arg(800);

void BM_ExtractJson(benchmark::State& state) {
    std::string text = "Here is the answer you asked for.\n```json\n{";
    for (int i = 0; i < 30; ++i) text += "\"aspect " + std::to_string(i) + "\": [\"phrase [1]\", \"other [2, 3]\"],";
    text += "}\n```\nLet me know if you need more.";
    for (auto _ : state) benchmark::DoNotOptimize(extract_json(text));
}
BENCHMARK(BM_ExtractJson);

void BM_RenderExtraction(benchmark::State& state) {
    SnippetSet set{"e", "Entity", {}};
    for (int i = 1; i <= 50; ++i) set.snippets.push_back({"e", i, "A snippet of moderate length describing a place " + std::to_string(i)});
    const Query q{"q1", "quiet beaches with good seafood", std::nullopt, DomainLabel::destination};
    for (auto _ : state) benchmark::DoNotOptimize(render_aspect_extraction(set, q));
}
BENCHMARK(BM_RenderExtraction);

void BM_Bootstrap(benchmark::State& state) {
    std::mt19937 rng(1);
    std::vector<OutcomeUnit> units(50);
    for (auto& u : units) {
        u.wins = rng() % 3;
        u.losses = 2 - u.wins;
    }
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_ci(units, static_cast<int>(state.range(0)), 0.95, 7));
}
BENCHMARK(BM_Bootstrap)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();

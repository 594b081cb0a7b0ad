#include "qstrum/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

/// Positions sorted by descending similarity; ties keep ingestion order.
std::vector<std::size_t> order_by_similarity(std::span<const double> sims) {
    std::vector<std::size_t> order(sims.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
    return order;
}

}  // namespace

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw NumericDomainError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    if (a.dim() == 0) throw NumericDomainError("cosine similarity of empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw NumericDomainError("cosine similarity with a zero vector");
    if (!std::isfinite(dot) || !std::isfinite(na) || !std::isfinite(nb)) {
        throw NumericDomainError("non-finite embedding values");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EntityScore score_entity(std::string entity_id, std::span<const double> similarities, std::size_t k) {
    if (k == 0) throw Error("k must be at least 1");
    if (similarities.empty()) throw Error("entity " + entity_id + " has no embedded snippets");
    const auto order = order_by_similarity(similarities);
    const auto m = std::min(k, order.size());
    EntityScore score{std::move(entity_id), 0.0, {}};
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sum += similarities[order[i]];
        score.top_snippets.push_back(order[i]);
    }
    score.score = sum / static_cast<double>(m);
    return score;
}

std::vector<EntityScore> rank_entities(const EmbeddingVector& query, std::span<const EntityCorpus> corpus,
                                       std::size_t k) {
    if (corpus.empty()) throw Error("cannot rank an empty corpus");
    std::vector<EntityScore> ranking;
    ranking.reserve(corpus.size());
    std::vector<double> sims;
    for (const auto& entity : corpus) {
        sims.clear();
        for (const auto& v : entity.snippet_vectors) sims.push_back(cosine_similarity(query, v));
        ranking.push_back(score_entity(entity.entity_id, sims, k));
    }
    std::sort(ranking.begin(), ranking.end(), [](const EntityScore& a, const EntityScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entity_id < b.entity_id;
    });
    return ranking;
}

std::pair<std::string, std::string> select_pair(std::span<const EntityScore> ranking) {
    if (ranking.size() < 2) {
        throw Error("need at least two ranked entities, got " + std::to_string(ranking.size()));
    }
    return {ranking[0].entity_id, ranking[1].entity_id};
}

SnippetSet extract_top_snippets(const EntityRecord& entity, std::span<const double> similarities, std::size_t k) {
    if (entity.texts.empty()) throw Error("entity " + entity.id + " has no snippets");
    if (similarities.size() != entity.texts.size()) {
        throw Error("entity " + entity.id + ": " + std::to_string(similarities.size()) + " similarities for " +
                    std::to_string(entity.texts.size()) + " snippets");
    }
    if (k == 0) throw Error("k must be at least 1");
    const auto order = order_by_similarity(similarities);
    const auto m = std::min(k, order.size());
    SnippetSet set{entity.id, entity.name, {}};
    set.snippets.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        set.snippets.push_back(Snippet{entity.id, static_cast<int>(i + 1), entity.texts[order[i]]});
    }
    return set;
}

std::string passthrough_expander(const Query& query) { return query.expanded_text.value_or(query.text); }

void to_json(Json& j, const RankedQuery& v) {
    Json ranking = Json::array();
    for (const auto& r : v.ranking) {
        ranking.push_back(Json{{"entity_id", r.entity_id}, {"score", r.score}, {"top_snippets", r.top_snippets}});
    }
    j = Json{{"query", v.query}, {"ranking", std::move(ranking)}, {"pair", Json::array({v.pair[0], v.pair[1]})}};
}

void from_json(const Json& j, RankedQuery& v) {
    v.query = j.at("query").get<Query>();
    v.ranking.clear();
    for (const auto& r : j.at("ranking")) {
        v.ranking.push_back(EntityScore{r.at("entity_id").get<std::string>(), r.at("score").get<double>(),
                                        r.at("top_snippets").get<std::vector<std::size_t>>()});
    }
    const auto& pair = j.at("pair");
    if (!pair.is_array() || pair.size() != 2) throw Error("ranked query must hold exactly two snippet sets");
    v.pair = {pair[0].get<SnippetSet>(), pair[1].get<SnippetSet>()};
}

std::vector<EntityCorpus> embed_corpus(const Dataset& dataset, Embedder& embedder) {
    std::vector<EntityCorpus> corpus;
    corpus.reserve(dataset.entities.size());
    for (const auto& entity : dataset.entities) {
        if (entity.texts.empty()) throw Error("entity " + entity.id + " has no snippets");
        corpus.push_back(EntityCorpus{entity.id, embedder.embed(entity.texts)});
    }
    return corpus;
}

RankedQuery rank_query(const Query& query, const Dataset& dataset, std::span<const EntityCorpus> corpus,
                       Embedder& embedder, std::size_t k, const QueryExpander& expand) {
    const auto query_vec = embedder.embed({expand ? expand(query) : query.text}).front();
    RankedQuery out{query, rank_entities(query_vec, corpus, k), {}};
    const auto [first, second] = select_pair(out.ranking);
    std::size_t slot = 0;
    for (const auto& id : {first, second}) {
        const auto* entity = dataset.find_entity(id);
        const auto it = std::find_if(corpus.begin(), corpus.end(), [&](const EntityCorpus& c) { return c.entity_id == id; });
        if (entity == nullptr || it == corpus.end()) throw Error("ranked entity " + id + " missing from dataset");
        std::vector<double> sims;
        sims.reserve(it->snippet_vectors.size());
        for (const auto& v : it->snippet_vectors) sims.push_back(cosine_similarity(query_vec, v));
        out.pair[slot++] = extract_top_snippets(*entity, sims, k);
    }
    return out;
}

}  // namespace qstrum

#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qstrum/dataset.hpp"
#include "qstrum/domain.hpp"
#include "qstrum/embedding.hpp"

namespace qstrum {

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws NumericDomainError on a
/// dimension mismatch, an empty vector or a zero vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct EntityScore {
    std::string entity_id;
    double score = 0.0;                   ///< mean of the top-min(k, n) similarities
    std::vector<std::size_t> top_snippets;  ///< positions (ingestion order) of the contributing snippets

    bool operator==(const EntityScore&) const = default;
};

/// One entity's embedded snippets, in ingestion order.
struct EntityCorpus {
    std::string entity_id;
    std::vector<EmbeddingVector> snippet_vectors;
};

/// Mean of the top-min(k, n) values; equal values keep ingestion order.
EntityScore score_entity(std::string entity_id, std::span<const double> similarities, std::size_t k);

/// Scores every entity and sorts by descending score, ties broken by entity_id.
/// Throws Error on an empty corpus, an entity without snippets, or k == 0.
std::vector<EntityScore> rank_entities(const EmbeddingVector& query, std::span<const EntityCorpus> corpus,
                                       std::size_t k = kDefaultSnippetCap);

/// First two entries of a ranking. Throws Error with fewer than two.
std::pair<std::string, std::string> select_pair(std::span<const EntityScore> ranking);

/// Top-min(k, n) snippets by similarity (stable for ties), renumbered 1..m.
SnippetSet extract_top_snippets(const EntityRecord& entity, std::span<const double> similarities,
                                std::size_t k = kDefaultSnippetCap);

/// Produces the text that is embedded for a query. Reformulation models plug in here.
using QueryExpander = std::function<std::string(const Query&)>;

/// Uses `expanded_text` when the dataset supplies one, otherwise the query text.
std::string passthrough_expander(const Query& query);

/// Result of preprocessing one query: full ranking plus the two selected snippet sets.
struct RankedQuery {
    Query query;
    std::vector<EntityScore> ranking;
    std::array<SnippetSet, 2> pair;
};

void to_json(Json& j, const RankedQuery& v);
void from_json(const Json& j, RankedQuery& v);

/// Embeds all snippets of a dataset once so several queries can be ranked against it.
std::vector<EntityCorpus> embed_corpus(const Dataset& dataset, Embedder& embedder);

/// Ranks entities for one query and extracts the top-k snippets of the selected pair.
RankedQuery rank_query(const Query& query, const Dataset& dataset, std::span<const EntityCorpus> corpus,
                       Embedder& embedder, std::size_t k = kDefaultSnippetCap,
                       const QueryExpander& expand = passthrough_expander);

}  // namespace qstrum

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qstrum/domain.hpp"

namespace qstrum {

/// One JSON Lines record of a snippet dataset.
struct SnippetRecord {
    std::string entity_id;
    std::string entity_name;
    std::string text;
    std::string source;
    std::size_t line = 0;  ///< 1-based line in the source file, 0 when built in memory
};

struct EntityRecord {
    std::string id;
    std::string name;
    std::vector<std::string> texts;  ///< in ingestion order
};

struct Dataset {
    std::vector<Query> queries;
    std::vector<EntityRecord> entities;  ///< in order of first appearance

    const EntityRecord* find_entity(std::string_view id) const;
    const Query* find_query(std::string_view id) const;
};

// Both loaders skip blank lines and throw DatasetError naming the 1-based line of
// the first malformed record, or line 0 when the file holds no records at all.
std::vector<SnippetRecord> load_snippet_records(const std::filesystem::path& path);
std::vector<Query> load_queries(const std::filesystem::path& path);

/// Groups records by entity. Throws DatasetError when one entity id carries two names.
Dataset build_dataset(const std::vector<SnippetRecord>& records, std::vector<Query> queries,
                      std::string_view source = "<snippets>");

Dataset load_dataset(const std::filesystem::path& snippets, const std::filesystem::path& queries);

/// Per-dataset statistics: query count, entity count, mean snippets per entity and
/// mean snippet length in characters (Unicode code points).
struct DatasetSummary {
    std::size_t queries = 0;
    std::size_t entities = 0;
    std::size_t snippets = 0;
    double mean_snippets_per_entity = 0.0;
    double mean_snippet_length = 0.0;
};

DatasetSummary summarize_dataset(const Dataset& dataset);

/// Number of code points in UTF-8 text (continuation bytes are not counted).
std::size_t utf8_length(std::string_view text);

void to_json(Json& j, const DatasetSummary& v);

}  // namespace qstrum

#include "qstrum/dataset.hpp"

#include <fstream>
#include <set>
#include <unordered_map>

#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

template <class F>
void for_each_record(const std::filesystem::path& path, F&& handle) {
    std::ifstream in(path);
    if (!in) throw DatasetError(path.string(), 0, "cannot open file");
    std::string line;
    std::size_t line_no = 0;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw DatasetError(path.string(), line_no, "not a JSON object");
        try {
            handle(j, line_no);
        } catch (const DatasetError&) {
            throw;
        } catch (const std::exception& e) {
            throw DatasetError(path.string(), line_no, e.what());
        }
        ++records;
    }
    if (records == 0) throw DatasetError(path.string(), 0, "file holds no records");
}

std::string required_string(const Json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw Error(std::string("missing string field '") + key + "'");
    auto value = it->get<std::string>();
    if (trim(value).empty()) throw Error(std::string("field '") + key + "' is empty");
    return value;
}

}  // namespace

const EntityRecord* Dataset::find_entity(std::string_view id) const {
    for (const auto& e : entities) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

const Query* Dataset::find_query(std::string_view id) const {
    for (const auto& q : queries) {
        if (q.id == id) return &q;
    }
    return nullptr;
}

std::vector<SnippetRecord> load_snippet_records(const std::filesystem::path& path) {
    std::vector<SnippetRecord> out;
    for_each_record(path, [&](const Json& j, std::size_t line_no) {
        SnippetRecord r;
        r.line = line_no;
        r.entity_id = required_string(j, "entity_id");
        r.entity_name = required_string(j, "entity_name");
        r.text = required_string(j, "text");
        if (const auto it = j.find("source"); it != j.end()) {
            if (!it->is_string()) throw Error("field 'source' must be a string");
            r.source = it->get<std::string>();
        }
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
    std::vector<Query> out;
    std::set<std::string> seen;
    for_each_record(path, [&](const Json& j, std::size_t line_no) {
        Query q;
        q.id = required_string(j, "id");
        q.text = required_string(j, "text");
        q.domain_label = parse_domain_label(required_string(j, "domain_label"));
        if (const auto it = j.find("expanded_text"); it != j.end() && it->is_string()) q.expanded_text = it->get<std::string>();
        if (!seen.insert(q.id).second) throw DatasetError(path.string(), line_no, "duplicate query id '" + q.id + "'");
        out.push_back(std::move(q));
    });
    return out;
}

Dataset build_dataset(const std::vector<SnippetRecord>& records, std::vector<Query> queries,
                      std::string_view source) {
    Dataset ds;
    ds.queries = std::move(queries);
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        auto [it, inserted] = pos.try_emplace(r.entity_id, ds.entities.size());
        if (inserted) ds.entities.push_back(EntityRecord{r.entity_id, r.entity_name, {}});
        auto& entity = ds.entities[it->second];
        if (entity.name != r.entity_name) {
            throw DatasetError(std::string(source), r.line != 0 ? r.line : i + 1,
                               "entity '" + r.entity_id + "' is named both '" + entity.name + "' and '" +
                                   r.entity_name + "'");
        }
        entity.texts.push_back(r.text);
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path& snippets, const std::filesystem::path& queries) {
    return build_dataset(load_snippet_records(snippets), load_queries(queries), snippets.string());
}

std::size_t utf8_length(std::string_view text) {
    std::size_t n = 0;
    for (unsigned char c : text) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

DatasetSummary summarize_dataset(const Dataset& dataset) {
    DatasetSummary s;
    s.queries = dataset.queries.size();
    s.entities = dataset.entities.size();
    std::size_t total_chars = 0;
    for (const auto& e : dataset.entities) {
        s.snippets += e.texts.size();
        for (const auto& t : e.texts) total_chars += utf8_length(t);
    }
    if (s.entities > 0) s.mean_snippets_per_entity = static_cast<double>(s.snippets) / static_cast<double>(s.entities);
    if (s.snippets > 0) s.mean_snippet_length = static_cast<double>(total_chars) / static_cast<double>(s.snippets);
    return s;
}

void to_json(Json& j, const DatasetSummary& v) {
    j = Json{{"queries", v.queries},
             {"entities", v.entities},
             {"snippets", v.snippets},
             {"mean_snippets_per_entity", v.mean_snippets_per_entity},
             {"mean_snippet_length", v.mean_snippet_length}};
}

}  // namespace qstrum

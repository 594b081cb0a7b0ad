#include "qstrum/domain.hpp"

#include <algorithm>
#include <cctype>

#include "qstrum/citations.hpp"
#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table,
             std::string_view what) {
    for (const auto& [value, name] : table) {
        if (name == s) return value;
    }
    throw Error("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <class E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<E, std::string_view>, N>& table) {
    for (const auto& [value, name] : table) {
        if (value == v) return name;
    }
    return "?";
}

constexpr std::array<std::pair<DomainLabel, std::string_view>, 3> kDomainLabels = {{
    {DomainLabel::destination, "destination"},
    {DomainLabel::restaurant, "restaurant"},
    {DomainLabel::hotel, "hotel"},
}};
constexpr std::array<std::pair<Tone, std::string_view>, 3> kTones = {{
    {Tone::standard, "standard"},
    {Tone::nice, "nice"},
    {Tone::aggressive, "aggressive"},
}};
constexpr std::array<std::pair<Criterion, std::string_view>, 4> kCriterionNames = {{
    {Criterion::contrast, "contrast"},
    {Criterion::relevancy, "relevancy"},
    {Criterion::diversity, "diversity"},
    {Criterion::usefulness, "usefulness"},
}};
constexpr std::array<std::pair<Winner, std::string_view>, 3> kWinners = {{
    {Winner::a, "a"},
    {Winner::b, "b"},
    {Winner::tie, "tie"},
}};
constexpr std::array<std::pair<JudgeOrder, std::string_view>, 2> kOrders = {{
    {JudgeOrder::ab, "AB"},
    {JudgeOrder::ba, "BA"},
}};

void aspects_to_json(Json& out, const std::vector<Aspect>& aspects) {
    out = Json::object();
    for (const auto& aspect : aspects) {
        Json phrases = Json::array();
        for (const auto& p : aspect.phrases) phrases.push_back(p.text);
        out[aspect.name] = std::move(phrases);
    }
}

std::vector<Aspect> aspects_from_json(const Json& j) {
    if (!j.is_object()) throw Error("aspects must be a JSON object");
    std::vector<Aspect> out;
    for (const auto& [name, phrases] : j.items()) {
        Aspect aspect{name, {}};
        for (const auto& p : phrases) aspect.phrases.push_back(CitedPhrase::from_text(p.get<std::string>()));
        out.push_back(std::move(aspect));
    }
    return out;
}

template <class T>
std::array<T, 2> pair_from_json(const Json& j, const char* key) {
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 2) {
        throw Error(std::string("'") + key + "' must hold exactly two entries");
    }
    return {arr[0].get<T>(), arr[1].get<T>()};
}

}  // namespace

std::string_view to_string(DomainLabel v) { return enum_name(v, kDomainLabels); }
std::string_view to_string(Tone v) { return enum_name(v, kTones); }
std::string_view to_string(Criterion v) { return enum_name(v, kCriterionNames); }
std::string_view to_string(Winner v) { return enum_name(v, kWinners); }
std::string_view to_string(JudgeOrder v) { return enum_name(v, kOrders); }

DomainLabel parse_domain_label(std::string_view s) { return parse_enum(s, kDomainLabels, "domain label"); }
Tone parse_tone(std::string_view s) { return parse_enum(s, kTones, "tone"); }
Criterion parse_criterion(std::string_view s) { return parse_enum(s, kCriterionNames, "criterion"); }
Winner parse_winner(std::string_view s) { return parse_enum(s, kWinners, "winner"); }
JudgeOrder parse_judge_order(std::string_view s) { return parse_enum(s, kOrders, "judge order"); }

std::string_view report_label(Criterion c) {
    switch (c) {
        case Criterion::contrast: return "Contrast";
        case Criterion::relevancy: return "Relevance";
        case Criterion::diversity: return "Diversity";
        case Criterion::usefulness: return "Usefulness";
    }
    return "?";
}

std::optional<std::string> check_snippet_set(const SnippetSet& set, std::size_t cap) {
    if (set.snippets.size() > cap) {
        return "snippet set for " + set.entity_id + " holds " + std::to_string(set.snippets.size()) +
               " snippets, cap is " + std::to_string(cap);
    }
    for (std::size_t i = 0; i < set.snippets.size(); ++i) {
        const auto& s = set.snippets[i];
        if (s.index != static_cast<int>(i + 1)) {
            return "snippet indices of " + set.entity_id + " are not contiguous at position " +
                   std::to_string(i + 1);
        }
        if (s.text.empty()) return "snippet " + std::to_string(s.index) + " of " + set.entity_id + " is empty";
        if (s.entity_id != set.entity_id) {
            return "snippet " + std::to_string(s.index) + " belongs to " + s.entity_id + ", not " + set.entity_id;
        }
    }
    return std::nullopt;
}

CitedPhrase CitedPhrase::from_text(std::string text) {
    CitedPhrase p;
    p.citations = cited_indices(text);
    p.text = std::move(text);
    return p;
}

const Aspect* EntityAspects::find(std::string_view aspect_name) const {
    const auto it = std::find_if(aspects.begin(), aspects.end(),
                                 [&](const Aspect& a) { return a.name == aspect_name; });
    return it == aspects.end() ? nullptr : &*it;
}

std::vector<std::string> EntityAspects::aspect_names() const {
    std::vector<std::string> names;
    names.reserve(aspects.size());
    for (const auto& a : aspects) names.push_back(a.name);
    return names;
}

std::optional<std::string> AspectMergeMap::EntityMap::lookup(std::string_view old_name) const {
    for (const auto& [from, to] : renames) {
        if (from == old_name) return to;
    }
    return std::nullopt;
}

const CriterionRate* WinRateReport::find(Criterion c) const {
    for (const auto& r : criteria) {
        if (r.criterion == c) return &r;
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

const Json* find_entity_key(const Json& object, std::string_view name) {
    if (!object.is_object()) return nullptr;
    const auto wanted = trim(name);
    for (const auto& [key, value] : object.items()) {
        if (trim(key) == wanted) return &value;
    }
    return nullptr;
}

std::string canonical_dump(const Json& j) {
    return j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

// ---- serialization -------------------------------------------------------

void to_json(Json& j, const Query& v) {
    j = Json{{"id", v.id}, {"text", v.text}};
    if (v.expanded_text) j["expanded_text"] = *v.expanded_text;
    j["domain_label"] = to_string(v.domain_label);
}

void from_json(const Json& j, Query& v) {
    v.id = j.at("id").get<std::string>();
    v.text = j.at("text").get<std::string>();
    v.expanded_text.reset();
    if (auto it = j.find("expanded_text"); it != j.end() && !it->is_null()) {
        v.expanded_text = it->get<std::string>();
    }
    v.domain_label = parse_domain_label(j.at("domain_label").get<std::string>());
}

void to_json(Json& j, const Snippet& v) {
    j = Json{{"entity_id", v.entity_id}, {"index", v.index}, {"text", v.text}};
}

void from_json(const Json& j, Snippet& v) {
    v.entity_id = j.at("entity_id").get<std::string>();
    v.index = j.at("index").get<int>();
    v.text = j.at("text").get<std::string>();
}

void to_json(Json& j, const SnippetSet& v) {
    j = Json{{"entity_id", v.entity_id}, {"entity_name", v.entity_name}, {"snippets", v.snippets}};
}

void from_json(const Json& j, SnippetSet& v) {
    v.entity_id = j.at("entity_id").get<std::string>();
    v.entity_name = j.at("entity_name").get<std::string>();
    v.snippets = j.at("snippets").get<std::vector<Snippet>>();
}

void to_json(Json& j, const CitedPhrase& v) { j = v.text; }

void from_json(const Json& j, CitedPhrase& v) { v = CitedPhrase::from_text(j.get<std::string>()); }

void to_json(Json& j, const EntityRef& v) { j = Json{{"id", v.id}, {"name", v.name}}; }

void from_json(const Json& j, EntityRef& v) {
    v.id = j.at("id").get<std::string>();
    v.name = j.at("name").get<std::string>();
}

void to_json(Json& j, const EntityAspects& v) {
    j = Json{{"entity", v.entity}};
    aspects_to_json(j["aspects"], v.aspects);
}

void from_json(const Json& j, EntityAspects& v) {
    v.entity = j.at("entity").get<EntityRef>();
    v.aspects = aspects_from_json(j.at("aspects"));
}

void to_json(Json& j, const AspectExtraction& v) { to_json(j, static_cast<const EntityAspects&>(v)); }

void from_json(const Json& j, AspectExtraction& v) { from_json(j, static_cast<EntityAspects&>(v)); }

void to_json(Json& j, const AspectMergeMap& v) {
    Json entities = Json::array();
    for (const auto& e : v.entities) {
        Json renames = Json::object();
        for (const auto& [from, to] : e.renames) renames[from] = to;
        entities.push_back(Json{{"entity", e.entity}, {"renames", std::move(renames)}});
    }
    j = Json{{"entities", std::move(entities)}};
}

void from_json(const Json& j, AspectMergeMap& v) {
    const auto& arr = j.at("entities");
    if (!arr.is_array() || arr.size() != 2) throw Error("merge map must hold exactly two entities");
    for (std::size_t i = 0; i < 2; ++i) {
        auto& e = v.entities[i];
        e.entity = arr[i].at("entity").get<EntityRef>();
        e.renames.clear();
        for (const auto& [from, to] : arr[i].at("renames").items()) {
            e.renames.emplace_back(from, to.get<std::string>());
        }
    }
}

void to_json(Json& j, const FilteredAspects& v) {
    j = Json{{"entities", Json::array({v.entities[0], v.entities[1]})}};
}

void from_json(const Json& j, FilteredAspects& v) { v.entities = pair_from_json<EntityAspects>(j, "entities"); }

void to_json(Json& j, const ContrastiveSummary& v) {
    j = Json{{"entities", Json::array({v.entities[0], v.entities[1]})}};
}

void from_json(const Json& j, ContrastiveSummary& v) {
    v.entities = pair_from_json<EntityAspects>(j, "entities");
}

void to_json(Json& j, const DebateTranscript& v) {
    j = Json{{"query_id", v.query_id},
             {"aspect", v.aspect_name},
             {"entity_ids", Json::array({v.entity_ids[0], v.entity_ids[1]})},
             {"tone", to_string(v.tone)},
             {"text", v.text}};
}

void from_json(const Json& j, DebateTranscript& v) {
    v.query_id = j.at("query_id").get<std::string>();
    v.aspect_name = j.at("aspect").get<std::string>();
    v.entity_ids = pair_from_json<std::string>(j, "entity_ids");
    v.tone = parse_tone(j.at("tone").get<std::string>());
    v.text = j.at("text").get<std::string>();
}

void to_json(Json& j, const DebateSummary& v) {
    Json entities = Json::array();
    for (const auto& e : v.entities) entities.push_back(Json{{"entity", e.entity}, {"text", e.text}});
    j = Json{{"aspect", v.aspect_name}, {"entities", std::move(entities)}};
}

void from_json(const Json& j, DebateSummary& v) {
    v.aspect_name = j.at("aspect").get<std::string>();
    const auto& arr = j.at("entities");
    if (!arr.is_array() || arr.size() != 2) throw Error("debate summary must hold exactly two entities");
    for (std::size_t i = 0; i < 2; ++i) {
        v.entities[i].entity = arr[i].at("entity").get<EntityRef>();
        v.entities[i].text = arr[i].at("text").get<std::string>();
    }
}

void to_json(Json& j, const JudgeVerdict& v) {
    j = Json{{"query_id", v.query_id},
             {"criterion", to_string(v.criterion)},
             {"order", to_string(v.order)},
             {"raw_label", v.raw_label},
             {"winner", to_string(v.winner)},
             {"explanation", v.explanation}};
}

void from_json(const Json& j, JudgeVerdict& v) {
    v.query_id = j.at("query_id").get<std::string>();
    v.criterion = parse_criterion(j.at("criterion").get<std::string>());
    v.order = parse_judge_order(j.at("order").get<std::string>());
    v.raw_label = j.at("raw_label").get<std::string>();
    v.winner = parse_winner(j.at("winner").get<std::string>());
    v.explanation = j.at("explanation").get<std::string>();
}

void to_json(Json& j, const CriterionRate& v) {
    j = Json{{"criterion", to_string(v.criterion)},
             {"wins", v.wins},
             {"losses", v.losses},
             {"ties", v.ties},
             {"missing", v.missing},
             {"win_rate", v.win_rate},
             {"ci_low", v.ci_low},
             {"ci_high", v.ci_high}};
}

void from_json(const Json& j, CriterionRate& v) {
    v.criterion = parse_criterion(j.at("criterion").get<std::string>());
    v.wins = j.at("wins").get<long>();
    v.losses = j.at("losses").get<long>();
    v.ties = j.at("ties").get<long>();
    v.missing = j.value("missing", 0L);
    v.win_rate = j.at("win_rate").get<double>();
    v.ci_low = j.at("ci_low").get<double>();
    v.ci_high = j.at("ci_high").get<double>();
}

void to_json(Json& j, const WinRateReport& v) {
    j = Json{{"dataset", v.dataset},
             {"judge_model", v.judge_model},
             {"method_a", v.method_a},
             {"method_b", v.method_b},
             {"queries", v.queries},
             {"bootstrap_iterations", v.bootstrap_iterations},
             {"seed", v.seed},
             {"criteria", v.criteria}};
}

void from_json(const Json& j, WinRateReport& v) {
    v.dataset = j.at("dataset").get<std::string>();
    v.judge_model = j.at("judge_model").get<std::string>();
    v.method_a = j.at("method_a").get<std::string>();
    v.method_b = j.at("method_b").get<std::string>();
    v.queries = j.at("queries").get<long>();
    v.bootstrap_iterations = j.at("bootstrap_iterations").get<int>();
    v.seed = j.at("seed").get<std::uint64_t>();
    v.criteria = j.at("criteria").get<std::vector<CriterionRate>>();
}

}  // namespace qstrum

#include "qstrum/validation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "qstrum/citations.hpp"
#include "qstrum/errors.hpp"

namespace qstrum {
namespace {

std::string quote_name(std::string_view s) { return "'" + std::string(s) + "'"; }

std::string expected_got(std::string_view owner, std::string_view what, std::size_t expected,
                         std::size_t got) {
    return std::string(owner) + ": expected " + std::to_string(expected) + " " + std::string(what) +
           ", got " + std::to_string(got);
}

/// Reads `{aspect: [phrase, ...], ...}`. Returns nullopt when `obj` is not an object.
/// Malformed members are reported and skipped.
std::optional<std::vector<Aspect>> read_aspects(const Json& obj, std::string_view owner,
                                                std::vector<std::string>& violations) {
    if (!obj.is_object()) return std::nullopt;
    std::vector<Aspect> aspects;
    for (const auto& [raw_name, value] : obj.items()) {
        const auto name = std::string(trim(raw_name));
        if (name.empty()) {
            violations.push_back(std::string(owner) + ": empty aspect name");
            continue;
        }
        Aspect aspect{name, {}};
        auto add_phrase = [&](const Json& item) {
            if (!item.is_string()) {
                violations.push_back(std::string(owner) + "/" + name + ": non-string phrase dropped");
                return;
            }
            auto text = std::string(trim(item.get<std::string>()));
            if (text.empty()) {
                violations.push_back(std::string(owner) + "/" + name + ": empty phrase dropped");
                return;
            }
            auto phrase = CitedPhrase::from_text(std::move(text));
            if (phrase.citations.empty()) {
                violations.push_back(std::string(owner) + "/" + name + ": phrase without citation " +
                                     quote_name(phrase.text));
            }
            aspect.phrases.push_back(std::move(phrase));
        };
        if (value.is_array()) {
            for (const auto& item : value) add_phrase(item);
        } else if (value.is_string()) {
            violations.push_back(std::string(owner) + "/" + name + ": expected a list of phrases, got a string");
            add_phrase(value);
        } else {
            violations.push_back(std::string(owner) + "/" + name + ": expected a list of phrases");
            continue;
        }
        aspects.push_back(std::move(aspect));
    }
    return aspects;
}

struct PairShape {
    std::size_t aspects = 0;
    std::size_t phrases = 0;
    std::string_view aspect_word;   // "aspects" / "attributes"
    std::string_view phrase_word;   // "phrases" / "bullets"
    bool reject_null_names = false;
};

/// Shared validator for the two-entity aspect tables (filter and summary stages).
template <class T>
Validated<T> validate_pair(const Json& output, const EntityRef& a, const EntityRef& b,
                           Strictness strictness, const PairShape& shape) {
    Validated<T> result;
    auto& v = result.violations;
    if (!output.is_object()) {
        v.push_back("output is not a JSON object");
        result.fatal = true;
        return result;
    }

    std::array<std::vector<Aspect>, 2> tables;
    const std::array<const EntityRef*, 2> refs = {&a, &b};
    for (std::size_t i = 0; i < 2; ++i) {
        const Json* member = find_entity_key(output, refs[i]->name);
        if (member == nullptr) {
            v.push_back("missing entity key " + quote_name(refs[i]->name));
            result.fatal = true;
            continue;
        }
        auto aspects = read_aspects(*member, refs[i]->name, v);
        if (!aspects) {
            v.push_back(refs[i]->name + ": expected an object of " + std::string(shape.aspect_word));
            result.fatal = true;
            continue;
        }
        tables[i] = std::move(*aspects);
    }
    for (const auto& [key, value] : output.items()) {
        if (trim(key) != trim(a.name) && trim(key) != trim(b.name)) v.push_back("unexpected key " + quote_name(key));
    }
    if (result.fatal) return result;

    for (std::size_t i = 0; i < 2; ++i) {
        auto& table = tables[i];
        if (shape.reject_null_names) {
            for (const auto& aspect : table) {
                if (is_null_like_name(aspect.name)) {
                    v.push_back(refs[i]->name + ": meaningless attribute name " + quote_name(aspect.name));
                }
            }
            std::erase_if(table, [](const Aspect& x) { return is_null_like_name(x.name); });
        }
        if (table.size() != shape.aspects) {
            v.push_back(expected_got(refs[i]->name, shape.aspect_word, shape.aspects, table.size()));
        }
        for (const auto& aspect : table) {
            if (aspect.phrases.size() != shape.phrases) {
                v.push_back(expected_got(refs[i]->name + "/" + aspect.name, shape.phrase_word, shape.phrases,
                                         aspect.phrases.size()));
            }
        }
    }

    std::set<std::string> names_a, names_b;
    for (const auto& x : tables[0]) names_a.insert(x.name);
    for (const auto& x : tables[1]) names_b.insert(x.name);
    if (names_a != names_b) v.push_back(std::string(shape.aspect_word) + " sets differ between entities");

    if (strictness == Strictness::strict) {
        if (v.empty()) {
            T value;
            value.entities[0] = EntityAspects{a, std::move(tables[0])};
            value.entities[1] = EntityAspects{b, std::move(tables[1])};
            result.value = std::move(value);
        }
        return result;
    }

    // Lenient: keep first entity's order, restricted to names both entities share.
    std::vector<Aspect> first, second;
    for (auto& aspect : tables[0]) {
        if (first.size() == shape.aspects) break;
        if (!names_b.contains(aspect.name)) continue;
        auto it = std::find_if(tables[1].begin(), tables[1].end(),
                               [&](const Aspect& x) { return x.name == aspect.name; });
        first.push_back(std::move(aspect));
        second.push_back(std::move(*it));
    }
    if (first.empty()) {
        v.push_back("no " + std::string(shape.aspect_word) + " shared by both entities");
        result.fatal = true;
        return result;
    }
    for (auto* side : {&first, &second}) {
        for (auto& aspect : *side) {
            if (aspect.phrases.size() > shape.phrases) aspect.phrases.resize(shape.phrases);
        }
    }
    T value;
    value.entities[0] = EntityAspects{a, std::move(first)};
    value.entities[1] = EntityAspects{b, std::move(second)};
    result.value = std::move(value);
    result.degraded = !v.empty();
    return result;
}

template <class T>
Validated<StageArtifact> widen(Validated<T>&& in) {
    Validated<StageArtifact> out;
    if (in.value) out.value = StageArtifact(std::move(*in.value));
    out.violations = std::move(in.violations);
    out.degraded = in.degraded;
    out.fatal = in.fatal;
    return out;
}

const SnippetSet& source_for(const EntityRef& entity, std::span<const SnippetSet> sources) {
    for (const auto& s : sources) {
        if (s.entity_id == entity.id) return s;
    }
    throw StructuralError("artifact references unknown entity " + quote_name(entity.id));
}

void check_indices(const SnippetSet& source, std::string_view aspect, const std::string& text,
                   const std::vector<int>& indices, std::vector<CitationViolation>& out) {
    const auto n = static_cast<int>(source.snippets.size());
    for (int idx : indices) {
        if (idx < 1 || idx > n) out.push_back({source.entity_id, std::string(aspect), text, idx});
    }
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

}  // namespace

std::string_view to_string(Strictness s) { return s == Strictness::strict ? "strict" : "lenient"; }

Strictness parse_strictness(std::string_view s) {
    if (s == "strict") return Strictness::strict;
    if (s == "lenient") return Strictness::lenient;
    throw ConfigError("unknown strictness '" + std::string(s) + "' (expected strict or lenient)");
}

std::string_view to_string(StageTag s) {
    switch (s) {
        case StageTag::aspect_extraction: return "aspect_extraction";
        case StageTag::aspect_merge: return "aspect_merge";
        case StageTag::filter: return "filter";
        case StageTag::summary: return "summary";
        case StageTag::debate_summary: return "debate_summary";
    }
    return "?";
}

bool is_null_like_name(std::string_view name) {
    std::string lowered;
    for (char c : trim(name)) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    static const std::set<std::string, std::less<>> kNullLike = {
        "", "null", "n/a", "na", "none", "nil", "undefined", "unknown", "not applicable", "-"};
    return kNullLike.contains(lowered);
}

bool mentions_debaters(std::string_view text) {
    for (std::string_view word : {std::string_view("Alice"), std::string_view("Bob")}) {
        std::size_t pos = 0;
        while ((pos = text.find(word, pos)) != std::string_view::npos) {
            const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
            const auto end = pos + word.size();
            const bool right_ok = end >= text.size() || !is_word_char(text[end]);
            if (left_ok && right_ok) return true;
            pos = end;
        }
    }
    return false;
}

Validated<AspectExtraction> validate_extraction(const Json& output, const EntityRef& entity,
                                                Strictness strictness) {
    Validated<AspectExtraction> result;
    auto& v = result.violations;
    auto aspects = read_aspects(output, entity.name, v);
    if (!aspects) {
        v.push_back("output is not a JSON object of aspects");
        result.fatal = true;
        return result;
    }
    if (aspects->empty()) {
        v.push_back(expected_got(entity.name, "aspects", kExtractionAspects, 0));
        result.fatal = true;
        return result;
    }
    if (aspects->size() != kExtractionAspects) {
        v.push_back(expected_got(entity.name, "aspects", kExtractionAspects, aspects->size()));
    }
    for (const auto& aspect : *aspects) {
        if (aspect.phrases.size() < kExtractionMinPhrases) {
            v.push_back(entity.name + "/" + aspect.name + ": expected at least " +
                        std::to_string(kExtractionMinPhrases) + " phrases, got " +
                        std::to_string(aspect.phrases.size()));
        }
    }
    if (strictness == Strictness::strict && !v.empty()) return result;
    if (aspects->size() > kExtractionAspects) aspects->resize(kExtractionAspects);
    AspectExtraction value;
    value.entity = entity;
    value.aspects = std::move(*aspects);
    result.value = std::move(value);
    result.degraded = !v.empty();
    return result;
}

Validated<AspectMergeMap> validate_merge_map(const Json& output, const AspectExtraction& a,
                                             const AspectExtraction& b, Strictness strictness) {
    Validated<AspectMergeMap> result;
    auto& v = result.violations;
    if (!output.is_object()) {
        v.push_back("output is not a JSON object");
        result.fatal = true;
        return result;
    }
    AspectMergeMap map;
    const std::array<const AspectExtraction*, 2> sources = {&a, &b};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& extraction = *sources[i];
        const auto& name = extraction.entity.name;
        const Json* member = find_entity_key(output, name);
        if (member == nullptr || !member->is_object()) {
            v.push_back(member == nullptr ? "missing entity key " + quote_name(name)
                                          : name + ": expected an object mapping old to new names");
            result.fatal = true;
            continue;
        }
        auto& entity_map = map.entities[i];
        entity_map.entity = extraction.entity;
        for (const auto& [raw_old, raw_new] : member->items()) {
            const auto old_name = std::string(trim(raw_old));
            if (extraction.find(old_name) == nullptr) {
                v.push_back(name + ": unknown attribute " + quote_name(old_name));
                continue;
            }
            if (!raw_new.is_string() || trim(raw_new.get<std::string>()).empty()) {
                v.push_back(name + ": attribute " + quote_name(old_name) + " maps to an empty or non-string name");
                continue;
            }
            if (entity_map.lookup(old_name)) {
                v.push_back(name + ": attribute " + quote_name(old_name) + " mapped twice");
                continue;
            }
            entity_map.renames.emplace_back(old_name, std::string(trim(raw_new.get<std::string>())));
        }
        // Domain must be exactly the extracted names; order follows the extraction.
        std::vector<std::pair<std::string, std::string>> ordered;
        for (const auto& aspect : extraction.aspects) {
            if (auto target = entity_map.lookup(aspect.name)) {
                ordered.emplace_back(aspect.name, *target);
            } else {
                v.push_back(name + ": attribute " + quote_name(aspect.name) + " is not mapped");
                ordered.emplace_back(aspect.name, aspect.name);
            }
        }
        entity_map.renames = std::move(ordered);
    }
    if (result.fatal) return result;

    std::set<std::string> image_a, image_b;
    for (const auto& [from, to] : map.entities[0].renames) image_a.insert(to);
    for (const auto& [from, to] : map.entities[1].renames) image_b.insert(to);
    if (image_a != image_b) {
        v.push_back("merged attribute sets differ between entities");
        if (strictness == Strictness::lenient) {
            result.fatal = true;
            return result;
        }
    }
    if (strictness == Strictness::strict && !v.empty()) return result;
    result.value = std::move(map);
    result.degraded = !v.empty();
    return result;
}

Validated<FilteredAspects> validate_filtered(const Json& output, const EntityRef& a, const EntityRef& b,
                                             Strictness strictness) {
    return validate_pair<FilteredAspects>(
        output, a, b, strictness, PairShape{kFilteredAspects, kFilteredPhrases, "aspects", "phrases", false});
}

Validated<ContrastiveSummary> validate_summary(const Json& output, const EntityRef& a, const EntityRef& b,
                                               Strictness strictness) {
    return validate_pair<ContrastiveSummary>(
        output, a, b, strictness,
        PairShape{kSummaryAttributes, kSummaryBullets, "attributes", "bullets", true});
}

Validated<DebateSummary> validate_debate_summary(const Json& output, std::string_view aspect,
                                                 const EntityRef& a, const EntityRef& b,
                                                 Strictness strictness) {
    Validated<DebateSummary> result;
    auto& v = result.violations;
    if (!output.is_object()) {
        v.push_back("output is not a JSON object");
        result.fatal = true;
        return result;
    }
    DebateSummary summary;
    summary.aspect_name = std::string(aspect);
    const std::array<const EntityRef*, 2> refs = {&a, &b};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& name = refs[i]->name;
        const Json* member = find_entity_key(output, name);
        if (member == nullptr) {
            v.push_back("missing entity key " + quote_name(name));
            result.fatal = true;
            continue;
        }
        std::string text;
        if (member->is_string()) {
            text = member->get<std::string>();
        } else if (member->is_array() &&
                   std::all_of(member->begin(), member->end(), [](const Json& x) { return x.is_string(); })) {
            v.push_back(name + ": expected a string, got a list");
            for (const auto& item : *member) {
                if (!text.empty()) text += ' ';
                text += item.get<std::string>();
            }
        } else {
            v.push_back(name + ": expected a string");
            result.fatal = true;
            continue;
        }
        text = std::string(trim(text));
        if (text.empty()) {
            v.push_back(name + ": empty summary");
            result.fatal = true;
            continue;
        }
        const auto markers = find_citation_markers(text).size();
        if (markers < kDebateSummaryMinCitations) {
            v.push_back(name + ": expected at least " + std::to_string(kDebateSummaryMinCitations) +
                        " cited points, got " + std::to_string(markers));
        }
        if (mentions_debaters(text)) v.push_back(name + ": mentions Alice or Bob");
        summary.entities[i] = DebateSummary::EntityText{*refs[i], std::move(text)};
    }
    for (const auto& [key, value] : output.items()) {
        if (trim(key) != trim(a.name) && trim(key) != trim(b.name)) v.push_back("unexpected key " + quote_name(key));
    }
    if (result.fatal) return result;
    if (strictness == Strictness::strict && !v.empty()) return result;
    result.value = std::move(summary);
    result.degraded = !v.empty();
    return result;
}

Validated<StageArtifact> validate_stage_schema(const Json& output, const StageContext& context,
                                               Strictness strictness) {
    switch (context.stage) {
        case StageTag::aspect_extraction:
            return widen(validate_extraction(output, context.first, strictness));
        case StageTag::aspect_merge:
            if (context.extraction_a == nullptr || context.extraction_b == nullptr) {
                throw Error("aspect_merge validation needs both extractions");
            }
            return widen(validate_merge_map(output, *context.extraction_a, *context.extraction_b, strictness));
        case StageTag::filter:
            return widen(validate_filtered(output, context.first, context.second, strictness));
        case StageTag::summary:
            return widen(validate_summary(output, context.first, context.second, strictness));
        case StageTag::debate_summary:
            return widen(validate_debate_summary(output, context.aspect, context.first, context.second, strictness));
    }
    throw Error("unknown stage");
}

std::string CitationViolation::describe() const {
    return "entity " + quote_name(entity_id) + ", aspect " + quote_name(aspect) + ": citation [" + std::to_string(index) +
           "] does not resolve (phrase " + quote_name(phrase) + ")";
}

std::vector<CitationViolation> validate_citations(const EntityAspects& artifact,
                                                  std::span<const SnippetSet> sources) {
    const auto& source = source_for(artifact.entity, sources);
    std::vector<CitationViolation> out;
    for (const auto& aspect : artifact.aspects) {
        for (const auto& phrase : aspect.phrases) check_indices(source, aspect.name, phrase.text, phrase.citations, out);
    }
    return out;
}

std::vector<CitationViolation> validate_citations(const FilteredAspects& artifact,
                                                  std::span<const SnippetSet> sources) {
    auto out = validate_citations(artifact.entities[0], sources);
    auto second = validate_citations(artifact.entities[1], sources);
    out.insert(out.end(), second.begin(), second.end());
    return out;
}

std::vector<CitationViolation> validate_citations(const ContrastiveSummary& artifact,
                                                  std::span<const SnippetSet> sources) {
    auto out = validate_citations(artifact.entities[0], sources);
    auto second = validate_citations(artifact.entities[1], sources);
    out.insert(out.end(), second.begin(), second.end());
    return out;
}

std::vector<CitationViolation> validate_citations(const DebateSummary& artifact,
                                                  std::span<const SnippetSet> sources) {
    std::vector<CitationViolation> out;
    for (const auto& e : artifact.entities) {
        const auto& source = source_for(e.entity, sources);
        check_indices(source, artifact.aspect_name, e.text, cited_indices(e.text), out);
    }
    return out;
}

}  // namespace qstrum

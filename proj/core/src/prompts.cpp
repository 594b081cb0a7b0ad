#include "qstrum/prompts.hpp"

#include "qstrum/errors.hpp"
#include "qstrum/hashing.hpp"
#include "qstrum/prompt_templates.hpp"

namespace qstrum {
namespace {

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";
constexpr std::string_view kToneAnchor = "for the specific aspect of: {{aspect}}.";

std::string_view raw_text(PromptKind kind) {
    switch (kind) {
        case PromptKind::aspect_extraction: return templates::aspect_extraction;
        case PromptKind::aspect_merge: return templates::aspect_merge;
        case PromptKind::filter: return templates::filter;
        case PromptKind::base_summary: return templates::base_summary;
        case PromptKind::contrastive_summary: return templates::contrastive_summary;
        case PromptKind::debate: return templates::debate;
        case PromptKind::debate_summary: return templates::debate_summary;
        case PromptKind::pairwise_judge: return templates::pairwise_judge;
    }
    throw RenderError("unknown prompt kind");
}

void require_text(std::string_view value, std::string_view what) {
    if (trim(value).empty()) throw RenderError(std::string(what) + " is empty");
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string dump_block(const Json& j) { return j.dump(4, ' ', false, Json::error_handler_t::replace); }

void require_block(const EntityBlock& block) {
    require_text(block.name, "entity name");
    if (!block.attributes.is_object() || block.attributes.empty()) {
        throw RenderError("attribute block for " + block.name + " is empty");
    }
}

void require_side(const DebateSide& side) {
    require_text(side.name, "entity name");
    if (side.sentences.empty()) throw RenderError("no sentences for " + side.name);
}

}  // namespace

std::string_view to_string(PromptKind kind) {
    switch (kind) {
        case PromptKind::aspect_extraction: return "aspect_extraction";
        case PromptKind::aspect_merge: return "aspect_merge";
        case PromptKind::filter: return "filter";
        case PromptKind::base_summary: return "base_summary";
        case PromptKind::contrastive_summary: return "contrastive_summary";
        case PromptKind::debate: return "debate";
        case PromptKind::debate_summary: return "debate_summary";
        case PromptKind::pairwise_judge: return "pairwise_judge";
    }
    return "?";
}

std::string_view to_string(SummaryFlavor flavor) {
    return flavor == SummaryFlavor::base ? "base" : "contrastive";
}

PromptTemplate::PromptTemplate(PromptKind kind, std::string text) : kind_(kind), text_(std::move(text)) {
    std::size_t pos = 0;
    while ((pos = text_.find(kOpen, pos)) != std::string::npos) {
        const auto close = text_.find(kClose, pos + kOpen.size());
        if (close == std::string::npos) throw RenderError("unterminated placeholder in " + std::string(to_string(kind)));
        required_.insert(text_.substr(pos + kOpen.size(), close - pos - kOpen.size()));
        pos = close + kClose.size();
    }
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
    for (const auto& name : required_) {
        if (!vars.contains(name)) {
            throw RenderError("missing variable '" + name + "' for " + std::string(to_string(kind_)));
        }
    }
    std::string out;
    out.reserve(text_.size() * 2);
    std::size_t pos = 0;
    while (true) {
        const auto open = text_.find(kOpen, pos);
        if (open == std::string::npos) {
            out.append(text_, pos, std::string::npos);
            break;
        }
        const auto close = text_.find(kClose, open + kOpen.size());
        out.append(text_, pos, open - pos);
        out += vars.at(text_.substr(open + kOpen.size(), close - open - kOpen.size()));
        pos = close + kClose.size();
    }
    return out;
}

const PromptTemplate& prompt_template(PromptKind kind) {
    static const auto table = [] {
        std::map<PromptKind, PromptTemplate> t;
        for (auto k : kPromptKinds) t.emplace(k, PromptTemplate(k, std::string(raw_text(k))));
        return t;
    }();
    return table.at(kind);
}

std::string template_hash(PromptKind kind) { return sha256_hex(raw_text(kind)); }

std::string_view tone_sentence(Tone tone) {
    switch (tone) {
        case Tone::standard: return {};
        case Tone::nice: return "Alice and Bob should both be nice and polite to each other.";
        case Tone::aggressive: return "Alice and Bob should both be aggressive and assertive with each other.";
    }
    throw RenderError("unknown tone");
}

EntityBlock entity_block(const EntityAspects& entity) {
    EntityBlock block{entity.entity.name, Json::object()};
    for (const auto& aspect : entity.aspects) {
        Json phrases = Json::array();
        for (const auto& p : aspect.phrases) phrases.push_back(p.text);
        block.attributes[aspect.name] = std::move(phrases);
    }
    return block;
}

DebateSide debate_side(const EntityAspects& entity, std::string_view aspect) {
    DebateSide side{entity.entity.name, {}};
    if (const auto* found = entity.find(aspect)) {
        for (const auto& p : found->phrases) side.sentences.push_back(p.text);
    }
    return side;
}

std::string render_aspect_extraction(const SnippetSet& entity, const Query& query) {
    require_text(query.text, "query");
    require_text(entity.entity_name, "entity name");
    if (entity.snippets.empty()) throw RenderError("snippet set for " + entity.entity_id + " is empty");
    std::vector<std::string> lines;
    lines.reserve(entity.snippets.size());
    for (const auto& s : entity.snippets) lines.push_back(std::to_string(s.index) + ". " + s.text);
    return prompt_template(PromptKind::aspect_extraction)
        .render({{"destination", entity.entity_name}, {"sentences", join_lines(lines)}, {"query", query.text}});
}

std::string render_aspect_merge(const AspectList& first, const AspectList& second, const Query& query) {
    require_text(query.text, "query");
    for (const auto* side : {&first, &second}) {
        require_text(side->name, "entity name");
        if (side->aspects.empty()) throw RenderError("aspect list for " + side->name + " is empty");
    }
    return prompt_template(PromptKind::aspect_merge)
        .render({{"dest1", first.name},
                 {"attributes1", Json(first.aspects).dump()},
                 {"dest2", second.name},
                 {"attributes2", Json(second.aspects).dump()},
                 {"query", query.text}});
}

std::string render_filter(const EntityBlock& first, const EntityBlock& second, const Query& query) {
    require_text(query.text, "query");
    require_block(first);
    require_block(second);
    return prompt_template(PromptKind::filter)
        .render({{"dest1", first.name},
                 {"attributes1", dump_block(first.attributes)},
                 {"dest2", second.name},
                 {"attributes2", dump_block(second.attributes)},
                 {"query", query.text}});
}

std::string render_summary(SummaryFlavor flavor, const EntityBlock& first, const EntityBlock& second,
                           const Query& query) {
    require_text(query.text, "query");
    require_block(first);
    require_block(second);
    const auto kind = flavor == SummaryFlavor::base ? PromptKind::base_summary : PromptKind::contrastive_summary;
    return prompt_template(kind).render({{"dest1", first.name},
                                         {"attributes1", dump_block(first.attributes)},
                                         {"dest2", second.name},
                                         {"attributes2", dump_block(second.attributes)},
                                         {"query", query.text}});
}

std::string render_contrastive(const EntityBlock& first, const EntityBlock& second, const Query& query) {
    return render_summary(SummaryFlavor::contrastive, first, second, query);
}

std::string render_debate(const DebateSide& first, const DebateSide& second, std::string_view aspect,
                          const Query& query, Tone tone) {
    require_text(query.text, "query");
    require_text(aspect, "aspect");
    require_side(first);
    require_side(second);
    const auto sentence = tone_sentence(tone);
    const std::map<std::string, std::string> vars{{"query", query.text},
                                                  {"dest1", first.name},
                                                  {"sents1", join_lines(first.sentences)},
                                                  {"dest2", second.name},
                                                  {"sents2", join_lines(second.sentences)},
                                                  {"aspect", std::string(aspect)}};
    const auto& base = prompt_template(PromptKind::debate);
    if (sentence.empty()) return base.render(vars);

    std::string text = base.text();
    const auto anchor = text.find(kToneAnchor);
    if (anchor == std::string::npos) throw RenderError("debate template lacks the tone anchor");
    text.insert(anchor + kToneAnchor.size(), " " + std::string(sentence));
    return PromptTemplate(PromptKind::debate, std::move(text)).render(vars);
}

std::string render_debate_summary(const DebateSide& first, const DebateSide& second, std::string_view aspect,
                                  const Query& query, std::string_view debate) {
    require_text(query.text, "query");
    require_text(aspect, "aspect");
    require_text(debate, "debate");
    require_side(first);
    require_side(second);
    return prompt_template(PromptKind::debate_summary)
        .render({{"query", query.text},
                 {"aspect", std::string(aspect)},
                 {"dest1", first.name},
                 {"sents1", join_lines(first.sentences)},
                 {"dest2", second.name},
                 {"sents2", join_lines(second.sentences)},
                 {"debate", std::string(debate)}});
}

std::string render_judge(const Query& query, std::string_view summary_a, std::string_view summary_b,
                         std::string_view domain_label) {
    require_text(query.text, "query");
    require_text(summary_a, "summary A");
    require_text(summary_b, "summary B");
    require_text(domain_label, "domain label");
    return prompt_template(PromptKind::pairwise_judge)
        .render({{"query", query.text},
                 {"a", std::string(summary_a)},
                 {"b", std::string(summary_b)},
                 {"domain", std::string(domain_label)}});
}

}  // namespace qstrum

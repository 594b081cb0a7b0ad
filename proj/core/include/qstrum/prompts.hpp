#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qstrum/domain.hpp"

namespace qstrum {

enum class PromptKind {
    aspect_extraction,
    aspect_merge,
    filter,
    base_summary,
    contrastive_summary,
    debate,
    debate_summary,
    pairwise_judge,
};

inline constexpr std::array<PromptKind, 8> kPromptKinds = {
    PromptKind::aspect_extraction, PromptKind::aspect_merge,   PromptKind::filter,
    PromptKind::base_summary,      PromptKind::contrastive_summary, PromptKind::debate,
    PromptKind::debate_summary,    PromptKind::pairwise_judge,
};

std::string_view to_string(PromptKind kind);

/// A template with `{{variable}}` placeholders. Substitution is single-pass, so
/// values are inserted literally and never re-expanded.
class PromptTemplate {
public:
    PromptTemplate(PromptKind kind, std::string text);

    PromptKind kind() const noexcept { return kind_; }
    const std::string& text() const noexcept { return text_; }
    const std::set<std::string>& required() const noexcept { return required_; }

    /// Throws RenderError when a required variable is missing.
    std::string render(const std::map<std::string, std::string>& vars) const;

private:
    PromptKind kind_;
    std::string text_;
    std::set<std::string> required_;
};

const PromptTemplate& prompt_template(PromptKind kind);

/// SHA-256 of the raw template text; recorded in run manifests.
std::string template_hash(PromptKind kind);

/// Sentence appended to the debate prompt for non-standard tones; empty for standard.
std::string_view tone_sentence(Tone tone);

/// One entity's block for the merge prompt: display name plus aspect names.
struct AspectList {
    std::string name;
    std::vector<std::string> aspects;
};

/// One entity's block for the filter and summarizer prompts. `attributes` is a JSON
/// object mapping aspect name to either a list of cited phrases or a text.
struct EntityBlock {
    std::string name;
    Json attributes;
};

EntityBlock entity_block(const EntityAspects& entity);

/// One entity's evidence for a single aspect in the debate prompts.
struct DebateSide {
    std::string name;
    std::vector<std::string> sentences;
};

DebateSide debate_side(const EntityAspects& entity, std::string_view aspect);

enum class SummaryFlavor { base, contrastive };

std::string_view to_string(SummaryFlavor flavor);

// Snippets render as "N. <text>" lines; aspect lists as compact JSON arrays;
// attribute blocks as JSON indented by four spaces; debate sentences one per line.
std::string render_aspect_extraction(const SnippetSet& entity, const Query& query);
std::string render_aspect_merge(const AspectList& first, const AspectList& second, const Query& query);
std::string render_filter(const EntityBlock& first, const EntityBlock& second, const Query& query);
std::string render_summary(SummaryFlavor flavor, const EntityBlock& first, const EntityBlock& second,
                           const Query& query);
std::string render_contrastive(const EntityBlock& first, const EntityBlock& second, const Query& query);
std::string render_debate(const DebateSide& first, const DebateSide& second, std::string_view aspect,
                          const Query& query, Tone tone);
std::string render_debate_summary(const DebateSide& first, const DebateSide& second, std::string_view aspect,
                                  const Query& query, std::string_view debate);
std::string render_judge(const Query& query, std::string_view summary_a, std::string_view summary_b,
                         std::string_view domain_label);

}  // namespace qstrum

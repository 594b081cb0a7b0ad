#pragma once

// Raw template texts, embedded at build time from core/templates/*.txt.

#include <string_view>

namespace qstrum::templates {

extern const std::string_view aspect_extraction;
extern const std::string_view aspect_merge;
extern const std::string_view filter;
extern const std::string_view base_summary;
extern const std::string_view contrastive_summary;
extern const std::string_view debate;
extern const std::string_view debate_summary;
extern const std::string_view pairwise_judge;

}  // namespace qstrum::templates

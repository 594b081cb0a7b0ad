#include "qstrum/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <vector>

#include "qstrum/citations.hpp"
#include "qstrum/errors.hpp"
#include "qstrum/hashing.hpp"
#include "qstrum/json_extract.hpp"
#include "qstrum/prompts.hpp"
#include "qstrum/validation.hpp"

namespace qstrum {
namespace {

constexpr std::array<std::string_view, 8> kThemes = {
    "atmosphere and ambiance",      "food and dining options",  "value for money",
    "location and accessibility",   "activities and attractions", "service and hospitality",
    "local culture and heritage",   "comfort and amenities",
};

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        lines.emplace_back(text.substr(start, nl == std::string_view::npos ? text.npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

std::string line_after(std::string_view prompt, std::string_view prefix) {
    for (const auto& line : split_lines(prompt)) {
        if (line.starts_with(prefix)) return line.substr(prefix.size());
    }
    return {};
}

/// Body lines that follow the "<header>" line, up to the next blank line.
std::vector<std::string> block_after(std::string_view prompt, std::string_view header_prefix) {
    const auto lines = split_lines(prompt);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!lines[i].starts_with(header_prefix)) continue;
        for (std::size_t j = i + 1; j < lines.size() && !lines[j].empty(); ++j) out.push_back(lines[j]);
        break;
    }
    return out;
}

/// JSON object that follows the "<header>" line.
Json object_after(std::string_view prompt, std::string_view header_prefix) {
    const auto pos = prompt.find(header_prefix);
    if (pos == std::string_view::npos) return Json::object();
    const auto open = prompt.find('{', pos);
    if (open == std::string_view::npos) return Json::object();
    const auto range = balanced_object_at(prompt, open);
    if (!range) return Json::object();
    return Json::parse(prompt.substr(range->first, range->second - range->first), nullptr, false);
}

std::string first_words(std::string_view text, std::size_t n) {
    std::istringstream in{std::string(text)};
    std::string word, out;
    for (std::size_t i = 0; i < n && in >> word; ++i) {
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

/// Splits text into pieces that each end with a citation marker.
std::vector<std::string> cited_segments(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (const auto& m : find_citation_markers(text)) {
        auto seg = std::string(trim(text.substr(pos, m.offset + m.length - pos)));
        while (!seg.empty() && (seg.front() == ';' || seg.front() == ',' || seg.front() == '.')) {
            seg = std::string(trim(std::string_view(seg).substr(1)));
        }
        if (!seg.empty()) out.push_back(std::move(seg));
        pos = m.offset + m.length;
    }
    return out;
}

std::vector<std::string> phrases_of(const Json& value) {
    std::vector<std::string> out;
    if (value.is_array()) {
        for (const auto& v : value) {
            if (v.is_string()) out.push_back(v.get<std::string>());
        }
    } else if (value.is_string()) {
        out = cited_segments(value.get<std::string>());
    }
    return out;
}

std::vector<std::string> cycle_to(const std::vector<std::string>& items, std::size_t n) {
    std::vector<std::string> out;
    if (items.empty()) return out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(items[i % items.size()]);
    return out;
}

// ---- per-stage synthesizers ---------------------------------------------------

std::string synth_extraction(std::string_view prompt) {
    const auto query = line_after(prompt, "Query: ");
    std::vector<std::string> snippets;
    for (const auto& line : split_lines(prompt)) {
        const auto dot = line.find(". ");
        if (dot == std::string::npos || dot == 0) continue;
        if (!std::all_of(line.begin(), line.begin() + static_cast<long>(dot),
                         [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            continue;
        }
        if (std::stoul(line.substr(0, dot)) != snippets.size() + 1) continue;
        snippets.push_back(line.substr(dot + 2));
    }
    Json out = Json::object();
    if (snippets.empty()) return out.dump(2);
    const auto offset = sha256_prefix64(query) % kThemes.size();
    for (std::size_t k = 0; k < kExtractionAspects; ++k) {
        const auto theme = std::string(kThemes[(offset + k) % kThemes.size()]);
        Json phrases = Json::array();
        for (std::size_t j = 0; j < kExtractionMinPhrases; ++j) {
            const auto idx = (j + k) % snippets.size();
            phrases.push_back(first_words(snippets[idx], 12) + " [" + std::to_string(idx + 1) + "]");
        }
        out[theme] = std::move(phrases);
    }
    return "```json\n" + out.dump(2) + "\n```";
}

std::string synth_merge(std::string_view prompt) {
    const auto name1 = line_after(prompt, "Destination 1: ");
    const auto name2 = line_after(prompt, "Destination 2: ");
    auto parse_list = [](const std::string& s) {
        std::vector<std::string> out;
        const Json j = Json::parse(s, nullptr, false);
        if (j.is_array()) {
            for (const auto& x : j) {
                if (x.is_string()) out.push_back(x.get<std::string>());
            }
        }
        return out;
    };
    const auto attrs1 = parse_list(line_after(prompt, "Attributes 1: "));
    const auto attrs2 = parse_list(line_after(prompt, "Attributes 2: "));

    Json first = Json::object();
    for (const auto& a : attrs1) first[a] = a;
    // Second entity: keep shared names, send the rest to targets not yet covered.
    std::vector<std::string> uncovered;
    for (const auto& a : attrs1) {
        if (std::find(attrs2.begin(), attrs2.end(), a) == attrs2.end()) uncovered.push_back(a);
    }
    Json second = Json::object();
    std::size_t next = 0;
    for (const auto& a : attrs2) {
        if (std::find(attrs1.begin(), attrs1.end(), a) != attrs1.end()) {
            second[a] = a;
        } else if (next < uncovered.size()) {
            second[a] = uncovered[next++];
        } else if (!attrs1.empty()) {
            second[a] = attrs1.front();
        }
    }
    Json out = Json::object();
    out[name1] = std::move(first);
    out[name2] = std::move(second);
    return out.dump(2);
}

std::string synth_filter(std::string_view prompt) {
    const auto name1 = line_after(prompt, "Destination 1: ");
    const auto name2 = line_after(prompt, "Destination 2: ");
    const Json attrs1 = object_after(prompt, "Destination 1: ");
    const Json attrs2 = object_after(prompt, "Destination 2: ");
    Json e1 = Json::object(), e2 = Json::object();
    if (attrs1.is_object() && attrs2.is_object()) {
        for (const auto& [name, value] : attrs1.items()) {
            if (e1.size() == kFilteredAspects) break;
            if (!attrs2.contains(name)) continue;
            e1[name] = cycle_to(phrases_of(value), kFilteredPhrases);
            e2[name] = cycle_to(phrases_of(attrs2.at(name)), kFilteredPhrases);
        }
    }
    Json out = Json::object();
    out[name1] = std::move(e1);
    out[name2] = std::move(e2);
    return "Here are the filtered attributes:\n" + out.dump(4);
}

std::string synth_summary(std::string_view prompt) {
    const bool contrastive = prompt.find("most contrasting") != std::string_view::npos;
    const auto name1 = line_after(prompt, "Destination 1: ");
    const auto name2 = line_after(prompt, "Destination 2: ");
    const Json attrs1 = object_after(prompt, "Destination 1: ");
    const Json attrs2 = object_after(prompt, "Destination 2: ");
    Json e1 = Json::object(), e2 = Json::object();
    auto bullets = [&](const Json& value, const std::string& other) {
        auto items = cycle_to(phrases_of(value), kSummaryBullets);
        if (contrastive) {
            for (auto& b : items) b = "Unlike " + other + ", " + b;
        }
        return items;
    };
    if (attrs1.is_object() && attrs2.is_object()) {
        for (const auto& [name, value] : attrs1.items()) {
            if (e1.size() == kSummaryAttributes) break;
            if (!attrs2.contains(name)) continue;
            e1[name] = bullets(value, name2);
            e2[name] = bullets(attrs2.at(name), name1);
        }
    }
    Json out = Json::object();
    out[name1] = std::move(e1);
    out[name2] = std::move(e2);
    return out.dump(4);
}

std::string synth_debate(std::string_view prompt) {
    const auto name1 = line_after(prompt, "Destination 1: ");
    const auto name2 = line_after(prompt, "Destination 2: ");
    const auto sents1 = block_after(prompt, "Destination 1: ");
    const auto sents2 = block_after(prompt, "Destination 2: ");
    std::string alice_lead, bob_lead;
    if (prompt.find(tone_sentence(Tone::nice)) != std::string_view::npos) {
        alice_lead = "With great respect for Bob's view, ";
        bob_lead = "That is a lovely point, Alice, and ";
    } else if (prompt.find(tone_sentence(Tone::aggressive)) != std::string_view::npos) {
        alice_lead = "Frankly, Bob, you are wrong: ";
        bob_lead = "Nonsense, Alice! ";
    }
    std::string out;
    const auto rounds = std::max(sents1.size(), sents2.size());
    for (std::size_t i = 0; i < rounds; ++i) {
        if (i < sents1.size()) {
            out += "Alice: " + alice_lead + name1 + " offers " + sents1[i] + ".\n";
        }
        if (i < sents2.size()) {
            out += "Bob: " + bob_lead + name2 + " counters with " + sents2[i] + ".\n";
        }
    }
    return out;
}

std::string synth_debate_summary(std::string_view prompt) {
    const auto aspect = line_after(prompt, "Aspect: ");
    const auto name1 = line_after(prompt, "Destination 1: ");
    const auto name2 = line_after(prompt, "Destination 2: ");
    auto summarize = [&](const std::vector<std::string>& sents, const std::string& self, const std::string& other) {
        std::string text = "For " + aspect + ", " + self + " stands out against " + other + ": ";
        const auto n = std::min<std::size_t>(sents.size(), 6);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) text += "; ";
            text += sents[i];
        }
        return text + ".";
    };
    Json out = Json::object();
    out[name1] = summarize(block_after(prompt, "Destination 1: "), name1, name2);
    out[name2] = summarize(block_after(prompt, "Destination 2: "), name2, name1);
    return out.dump(1);
}

std::string between(std::string_view text, std::string_view start, std::string_view end) {
    const auto s = text.find(start);
    if (s == std::string_view::npos) return {};
    const auto from = s + start.size();
    const auto e = text.find(end, from);
    return std::string(text.substr(from, e == std::string_view::npos ? text.npos : e - from));
}

std::string synth_judge(std::string_view prompt, MockJudgePolicy policy) {
    const auto a = between(prompt, "Explanation A:\n", "\n\nExplanation B:\n");
    const auto b = between(prompt, "Explanation B:\n", "\n\nYour role is to evaluate");
    std::string winner, why;
    switch (policy) {
        case MockJudgePolicy::first_position:
            winner = "A";
            why = "Explanation A is preferred.";
            break;
        case MockJudgePolicy::second_position:
            winner = "B";
            why = "Explanation B is preferred.";
            break;
        case MockJudgePolicy::honest: {
            if (a == b) {
                winner = "tie";
                why = "Both explanations are the same.";
                break;
            }
            const auto ca = find_citation_markers(a).size();
            const auto cb = find_citation_markers(b).size();
            winner = ca == cb ? "tie" : (ca > cb ? "A" : "B");
            why = "Explanation A cites " + std::to_string(ca) + " points and Explanation B cites " +
                  std::to_string(cb) + ".";
            break;
        }
    }
    Json out = Json::object();
    for (auto c : kCriteria) {
        out[std::string(to_string(c))] = winner;
        out[std::string(to_string(c)) + "_explanation"] = why;
    }
    return out.dump(4);
}

}  // namespace

std::string_view stage_of_tag(std::string_view request_tag) {
    return request_tag.substr(0, request_tag.find(':'));
}

long approximate_tokens(std::string_view text) {
    long n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string synthesize_response(const ChatRequest& request, MockJudgePolicy judge) {
    const auto stage = stage_of_tag(request.request_tag);
    const std::string_view prompt = request.prompt;
    if (stage == "aspect_extraction") return synth_extraction(prompt);
    if (stage == "aspect_merge") return synth_merge(prompt);
    if (stage == "filter") return synth_filter(prompt);
    if (stage == "summary") return synth_summary(prompt);
    if (stage == "debate") return synth_debate(prompt);
    if (stage == "debate_summary") return synth_debate_summary(prompt);
    if (stage == "judge") return synth_judge(prompt, judge);
    return "I am a mock model and have nothing to say about '" + request.request_tag + "'.";
}

MockBackend::MockBackend(std::string id, MockJudgePolicy judge) : id_(std::move(id)), judge_(judge) {}

void MockBackend::register_fixture(const CacheKey& key, std::string response_text) {
    std::lock_guard lock(mu_);
    fixtures_[key.digest] = std::move(response_text);
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
    ++calls_;
    ChatResponse response;
    response.backend_id = id_;
    {
        std::lock_guard lock(mu_);
        if (auto it = fixtures_.find(CacheKey::of(request).digest); it != fixtures_.end()) response.text = it->second;
    }
    if (response.text.empty()) response.text = synthesize_response(request, judge_);
    response.usage = TokenUsage{approximate_tokens(request.prompt), approximate_tokens(response.text)};
    return response;
}

}  // namespace qstrum

#include <gtest/gtest.h>

#include <random>

#include "qstrum/errors.hpp"
#include "qstrum/json_extract.hpp"

namespace qstrum {
namespace {

// Brute force: the first '{' from which some substring parses as a JSON object.
std::optional<Json> oracle_first_object(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        for (std::size_t j = i + 1; j <= text.size(); ++j) {
            const auto parsed = Json::parse(text.substr(i, j - i), nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object()) return std::optional<Json>(parsed);
        }
    }
    return std::nullopt;
}

Json random_value(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 2 ? 2 : 4);
    switch (kind(rng)) {
        case 0: return static_cast<int>(rng() % 100);
        case 1: return std::string(rng() % 2 ? "br{ace}" : "q\"uote");
        case 2: return rng() % 2 == 0;
        case 3: {
            Json arr = Json::array();
            for (unsigned n = rng() % 3; n > 0; --n) arr.push_back(random_value(rng, depth + 1));
            return arr;
        }
        default: {
            Json obj = Json::object();
            for (unsigned n = rng() % 3; n > 0; --n) obj["k" + std::to_string(rng() % 10)] = random_value(rng, depth + 1);
            return obj;
        }
    }
}

std::string random_prose(std::mt19937& rng) {
    static const std::string alphabet = "abc xyz {}";
    std::string s;
    for (unsigned n = rng() % 12; n > 0; --n) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

TEST(JsonExtract, FencedBlock) {
    EXPECT_EQ(extract_json("```json\n{\"a\":1}\n```"), Json::parse(R"({"a":1})"));
}

TEST(JsonExtract, NestedObjectInProse) {
    const auto j = extract_json("Here is the result: {\"a\": {\"b\": [1,2]}} Thanks!");
    EXPECT_EQ(j, Json::parse(R"({"a": {"b": [1,2]}})"));
}

TEST(JsonExtract, NoJsonThrowsWithRawText) {
    try {
        extract_json("no json here");
        FAIL();
    } catch (const JsonExtractError& e) {
        EXPECT_EQ(e.raw_text(), "no json here");
    }
}

TEST(JsonExtract, TrailingCommasRepaired) {
    EXPECT_EQ(extract_json("{\"a\": [1, 2,], }"), Json::parse(R"({"a": [1, 2]})"));
    EXPECT_EQ(strip_trailing_commas(R"({"s": ",}", "t": 1 ,})"), R"({"s": ",}", "t": 1 })");
}

TEST(JsonExtract, FenceWinsOverEarlierProseObject) {
    EXPECT_EQ(extract_json("{\"x\": 0}\n```\n{\"y\": 1}\n```"), Json::parse(R"({"y": 1})"));
}

TEST(JsonExtract, FenceWithoutObjectFallsBackToWholeText) {
    EXPECT_EQ(extract_json("```\nnothing\n``` then {\"z\": 2}"), Json::parse(R"({"z": 2})"));
}

TEST(JsonExtract, BracesInsideStrings) {
    const auto r = balanced_object_at(R"(xx{"a": "}{"} tail)", 2);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->first, 2u);
    EXPECT_EQ(r->second, 13u);
    EXPECT_FALSE(balanced_object_at("{[}", 0));
    EXPECT_FALSE(balanced_object_at("x", 0));
}

TEST(JsonExtract, AgreesWithBruteForceScanner) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        Json obj = Json::object();
        for (unsigned n = 1 + rng() % 3; n > 0; --n) obj["k" + std::to_string(n)] = random_value(rng, 0);
        const auto text = random_prose(rng) + obj.dump(rng() % 2 ? -1 : 2) + random_prose(rng);
        const auto expected = oracle_first_object(text);
        ASSERT_TRUE(expected) << text;
        EXPECT_EQ(extract_json(text), *expected) << text;
    }
}

}  // namespace
}  // namespace qstrum

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "qstrum/content_store.hpp"
#include "qstrum/dataset.hpp"
#include "qstrum/errors.hpp"
#include "test_support.hpp"

namespace qstrum {
namespace {

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string snippet_line(const std::string& id, const std::string& name, const std::string& text) {
    return Json{{"entity_id", id}, {"entity_name", name}, {"text", text}}.dump() + "\n";
}

TEST(Dataset, ArithmeticOnSmallFixture) {
    testing::TempDir dir;
    std::string snippets;
    for (const auto& [id, name] : {std::pair{"e1", "One"}, {"e2", "Two"}}) {
        for (const auto* text : {"abcdefghij", "0123456789", "klmnopqrst"}) snippets += snippet_line(id, name, text);
    }
    write(dir / "s.jsonl", snippets);
    write(dir / "q.jsonl", R"({"id": "q1", "text": "t", "domain_label": "hotel"})" "\n");
    const auto s = summarize_dataset(load_dataset(dir / "s.jsonl", dir / "q.jsonl"));
    EXPECT_EQ(s.queries, 1u);
    EXPECT_EQ(s.entities, 2u);
    EXPECT_EQ(s.snippets, 6u);
    EXPECT_DOUBLE_EQ(s.mean_snippets_per_entity, 3.0);
    EXPECT_DOUBLE_EQ(s.mean_snippet_length, 10.0);
}

TEST(Dataset, RandomFixturesAgainstArithmetic) {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SnippetRecord> records;
        const int entities = 1 + static_cast<int>(rng() % 8);
        std::size_t total = 0, chars = 0;
        for (int e = 0; e < entities; ++e) {
            const int n = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i) {
                const std::string text(1 + rng() % 40, 'x');
                records.push_back({"e" + std::to_string(e), "E", text, "", 0});
                ++total;
                chars += text.size();
            }
        }
        const auto s = summarize_dataset(build_dataset(records, {}));
        EXPECT_EQ(s.entities, static_cast<std::size_t>(entities));
        EXPECT_DOUBLE_EQ(s.mean_snippets_per_entity, static_cast<double>(total) / entities);
        EXPECT_DOUBLE_EQ(s.mean_snippet_length, static_cast<double>(chars) / static_cast<double>(total));
    }
}

TEST(Dataset, LengthCountsCodePoints) {
    EXPECT_EQ(utf8_length("caf\xc3\xa9"), 4u);
    EXPECT_EQ(utf8_length("\xe6\x9d\xb1\xe4\xba\xac"), 2u);
    EXPECT_EQ(utf8_length(""), 0u);
}

TEST(Dataset, EmptyFileIsAnError) {
    testing::TempDir dir;
    write(dir / "s.jsonl", "\n\n");
    try {
        load_snippet_records(dir / "s.jsonl");
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_EQ(e.line(), 0u);
    }
}

TEST(Dataset, MalformedLineIsNamed) {
    testing::TempDir dir;
    write(dir / "s.jsonl", snippet_line("e1", "One", "ok") + "\n" + "{not json\n");
    try {
        load_snippet_records(dir / "s.jsonl");
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    write(dir / "s2.jsonl", snippet_line("e1", "One", "ok") + R"({"entity_id": "e2", "entity_name": "Two"})" "\n");
    try {
        load_snippet_records(dir / "s2.jsonl");
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("text"), std::string::npos);
    }
}

TEST(Dataset, QueryErrors) {
    testing::TempDir dir;
    write(dir / "q.jsonl", R"({"id": "q1", "text": "t", "domain_label": "castle"})" "\n");
    EXPECT_THROW(load_queries(dir / "q.jsonl"), DatasetError);
    write(dir / "q.jsonl", R"({"id": "q1", "text": "t", "domain_label": "hotel"})" "\n"
                           R"({"id": "q1", "text": "u", "domain_label": "hotel"})" "\n");
    EXPECT_THROW(load_queries(dir / "q.jsonl"), DatasetError);
    EXPECT_THROW(load_queries(dir / "missing.jsonl"), DatasetError);
}

TEST(Dataset, ConflictingNamesRejected) {
    const std::vector<SnippetRecord> records = {{"e1", "One", "a", "", 1}, {"e1", "Uno", "b", "", 2}};
    try {
        build_dataset(records, {});
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Dataset, EntitiesKeepFirstAppearanceOrder) {
    const std::vector<SnippetRecord> records = {
        {"z", "Z", "1", "", 0}, {"a", "A", "2", "", 0}, {"z", "Z", "3", "", 0}};
    const auto ds = build_dataset(records, {});
    ASSERT_EQ(ds.entities.size(), 2u);
    EXPECT_EQ(ds.entities[0].id, "z");
    EXPECT_EQ(ds.entities[0].texts, (std::vector<std::string>{"1", "3"}));
    EXPECT_NE(ds.find_entity("a"), nullptr);
    EXPECT_EQ(ds.find_entity("b"), nullptr);
}

TEST(ContentStoreTest, PutGetAndAtomicWrite) {
    testing::TempDir dir;
    ContentStore store(dir / "cs");
    EXPECT_FALSE(store.get("abc"));
    store.put("abc", Json{{"v", 1}});
    EXPECT_TRUE(store.contains("abc"));
    EXPECT_EQ(store.get("abc")->at("v"), 1);
    write_file_atomic(dir / "nested" / "f.txt", "hello");
    EXPECT_EQ(read_file(dir / "nested" / "f.txt"), "hello");
}

}  // namespace
}  // namespace qstrum

#include <gtest/gtest.h>

#include <random>

#include "sciforge/chunker.hpp"

using namespace sciforge::chunker;

namespace {

std::string random_body(std::mt19937_64& g, std::size_t words) {
    static const char* seps[] = {" ", " ", " ", "  ", "\n", "\n\n", ". ", ".\n\n", "\t"};
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        const auto len = 1 + g() % 9;
        for (std::size_t k = 0; k < len; ++k) s += static_cast<char>('a' + g() % 26);
        s += seps[g() % 9];
    }
    return s;
}

}  // namespace

TEST(Tokenizers, Counting) {
    EXPECT_EQ(count_tokens("  a bb\n\nccc "), 3u);
    ByteRatioTokenizer bytes(4);
    EXPECT_EQ(bytes.count("abcd abcde"), 3u);
    EXPECT_EQ(make_tokenizer("whitespace")->name(), "whitespace");
    EXPECT_EQ(make_tokenizer("bytes/3")->count("abcdefg"), 3u);
    EXPECT_THROW(make_tokenizer("bpe"), std::invalid_argument);
}

TEST(Chunk, ShortBodyIsOneChunk) {
    const auto cs = chunk("d", "Just a few words.", 64);
    ASSERT_EQ(cs.size(), 1u);
    EXPECT_TRUE(cs[0].is_last);
    EXPECT_EQ(cs[0].text, "Just a few words.");
    EXPECT_EQ(reassemble(cs), "Just a few words.");
}

TEST(Chunk, MarkersBudgetsAndRoundTrip) {
    std::mt19937_64 g(1);
    WhitespaceTokenizer ws;
    for (std::size_t budget : {8u, 16u, 64u}) {
        for (int t = 0; t < 30; ++t) {
            const auto body = random_body(g, 20 + g() % 400);
            const auto cs = chunk("doc", body, budget, ws);
            for (std::size_t i = 0; i < cs.size(); ++i) {
                EXPECT_EQ(cs[i].index, i);
                EXPECT_LE(cs[i].token_count, budget);
                EXPECT_EQ(cs[i].token_count, ws.count(cs[i].text));
                const bool last = i + 1 == cs.size();
                EXPECT_EQ(cs[i].is_last, last);
                const bool marked = cs[i].text.size() >= 6 && cs[i].text.ends_with(" [TBC]");
                EXPECT_EQ(marked, !last) << cs[i].text;
            }
            ASSERT_EQ(reassemble(cs), body);
        }
    }
}

TEST(Chunk, FewestChunksAndParagraphPreference) {
    // Two paragraphs of 5 words; budget 7 leaves room for 5 words + marker.
    const std::string body = "a b c d e\n\nf g h i j";
    const auto cs = chunk("d", body, 7);
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_EQ(cs[0].text.substr(0, 9), "a b c d e");
    EXPECT_EQ(reassemble(cs), body);

    // A sentence end inside the window is preferred over a plain space.
    const auto cs2 = chunk("d", "one two. three four five six seven", 6);
    ASSERT_EQ(cs2.size(), 2u);
    EXPECT_TRUE(cs2[0].text.starts_with("one two."));
    EXPECT_FALSE(cs2[0].text.starts_with("one two. three"));
}

TEST(Chunk, ByteRatioBudgets) {
    std::mt19937_64 g(2);
    ByteRatioTokenizer bytes(4);
    const auto body = random_body(g, 300);
    const auto cs = chunk("d", body, 40, bytes);
    for (const auto& c : cs) EXPECT_LE(c.token_count, 40u);
    EXPECT_EQ(reassemble(cs), body);
}

TEST(Chunk, Errors) {
    EXPECT_THROW(chunk("d", "   \n", 64), ChunkError);
    EXPECT_THROW(chunk("d", "a b", 2), std::invalid_argument);
    ByteRatioTokenizer bytes(1);
    EXPECT_THROW(chunk("d", std::string(100, 'x') + " y z", 20, bytes), ChunkError);
    auto cs = chunk("d", "a b c d e f g h i j k l", 4);
    ASSERT_GT(cs.size(), 2u);
    auto gap = cs;
    gap.erase(gap.begin() + 1);
    EXPECT_THROW(reassemble(gap), ChunkError);
    auto mixed = cs;
    mixed[1].doc_id = "other";
    EXPECT_THROW(reassemble(mixed), ChunkError);
    auto unmarked = cs;
    unmarked[0].text = "a";
    EXPECT_THROW(reassemble(unmarked), ChunkError);
}

TEST(Chunk, JsonRoundTrip) {
    const auto cs = chunk("d", "a b c d e f g h i j k l", 4);
    for (const auto& c : cs) EXPECT_EQ(chunk_from_json(to_json(c)), c);
}

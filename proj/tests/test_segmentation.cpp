#include <doctest.h>

#include <cctype>
#include <string>
#include <vector>

#include "tmpc/errors.hpp"
#include "tmpc/rng.hpp"
#include "tmpc/segmentation.hpp"

using namespace tmpc;

namespace {

std::string whitespace_normalized(const std::string& text) {
    std::string out;
    bool in_space = true;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) {
            out.push_back(' ');
        }
        in_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string join_segments(const std::vector<Segment>& segments) {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out += segments[i].text;
    }
    return out;
}

std::vector<std::string> texts(const std::vector<Segment>& segments) {
    std::vector<std::string> out;
    for (const Segment& s : segments) {
        out.push_back(s.text);
    }
    return out;
}

} // namespace

TEST_CASE("chunk mode groups sentences, last group may be short") {
    const auto segments = segment_text("A. B. C. D.", SegmenterSpec{SegmentMode::chunk, 3});
    REQUIRE(segments.size() == 2);
    CHECK(segments[0].text == "A. B. C.");
    CHECK(segments[1].text == "D.");
    CHECK(segments[0].index == 0);
    CHECK(segments[1].index == 1);
}

TEST_CASE("single sentence stays one segment") {
    const auto segments = segment_text("One sentence only.", SegmenterSpec{SegmentMode::sentence, 1});
    REQUIRE(segments.size() == 1);
    CHECK(segments[0].text == "One sentence only.");
}

TEST_CASE("fullwidth terminators split CJK text") {
    const auto segments = segment_text("你好。世界！", SegmenterSpec{SegmentMode::sentence, 1});
    REQUIRE(segments.size() == 2);
    CHECK(segments[0].text == "你好。");
    CHECK(segments[1].text == "世界！");
}

// Hand-built splitting oracle: inputs paired with their expected sentence
// lists, worked out by hand from the terminator rule.
TEST_CASE("sentence splitter matches the hand-built corpus") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> corpus = {
        {"Hello world.", {"Hello world."}},
        {"Hello. World.", {"Hello.", "World."}},
        {"One! Two? Three.", {"One!", "Two?", "Three."}},
        {"No terminator", {"No terminator"}},
        {"Trailing tail. rest", {"Trailing tail.", "rest"}},
        {"Wait... what?", {"Wait...", "what?"}},
        {"你好。世界！", {"你好。", "世界！"}},
        {"混合 mixed。Yes.", {"混合 mixed。", "Yes."}},
        {"A.B.", {"A.", "B."}},
        {"  padded.   spaced!  ", {"padded.", "spaced!"}},
        {"?", {"?"}},
        {"e.g. example.", {"e.", "g.", "example."}}, // abbreviations are not special-cased
        {"Multi  space.  Next.", {"Multi  space.", "Next."}},
        {"Tab\tseparated. Done.", {"Tab\tseparated.", "Done."}},
        {"новый мир. Second.", {"новый мир.", "Second."}},
        {"？！", {"？！"}},
        {"Mix。of ALL! kinds? yes", {"Mix。", "of ALL!", "kinds?", "yes"}},
        {"a", {"a"}},
        {"1. 2. 3.", {"1.", "2.", "3."}},
        {"He said \"go.\" Then left.", {"He said \"go.", "\" Then left."}},
    };
    REQUIRE(corpus.size() == 20);
    for (const auto& pair : corpus) {
        const std::string& input = pair.first;
        CAPTURE(input);
        CHECK(split_sentences(input) == pair.second);
    }
}

TEST_CASE("empty or whitespace responses are rejected") {
    CHECK_THROWS_AS(segment_text("", SegmenterSpec{}), EmptyResponseError);
    CHECK_THROWS_AS(segment_text("   \t\n", SegmenterSpec{}), EmptyResponseError);
}

TEST_CASE("milestone mode requires test results") {
    CHECK_THROWS_AS(segment_text("x", SegmenterSpec{SegmentMode::milestone, 1}),
                    ContractViolation);
    CHECK_THROWS_AS(segment_text("x", SegmenterSpec{SegmentMode::chunk, 0}), ContractViolation);
}

TEST_CASE("segmentation is lossless up to inter-segment whitespace") {
    Rng rng(23);
    const std::vector<std::string> words = {"alpha", "bravo", "charlie", "delta", "echo"};
    const std::vector<std::string> terminators = {".", "!", "?", "。", "！"};
    for (int round = 0; round < 200; ++round) {
        std::string text;
        const std::size_t sentences = 1 + rng.next_index(8);
        for (std::size_t s = 0; s < sentences; ++s) {
            const std::size_t length = 1 + rng.next_index(4);
            for (std::size_t w = 0; w < length; ++w) {
                if (!text.empty()) {
                    text.push_back(' ');
                }
                text += words[rng.next_index(words.size())];
            }
            text += terminators[rng.next_index(terminators.size())];
        }
        const int chunk = 1 + static_cast<int>(rng.next_index(4));
        const auto segments = segment_text(text, SegmenterSpec{SegmentMode::chunk, chunk});
        CHECK(whitespace_normalized(join_segments(segments)) == whitespace_normalized(text));
    }
}

TEST_CASE("chunk size one equals sentence mode") {
    Rng rng(31);
    const std::vector<std::string> words = {"one", "two", "three"};
    for (int round = 0; round < 100; ++round) {
        std::string text;
        const std::size_t sentences = 1 + rng.next_index(6);
        for (std::size_t s = 0; s < sentences; ++s) {
            text += words[rng.next_index(words.size())];
            text += rng.next_index(2) == 0 ? ". " : "! ";
        }
        const auto by_sentence = segment_text(text, SegmenterSpec{SegmentMode::sentence, 1});
        const auto by_chunk = segment_text(text, SegmenterSpec{SegmentMode::chunk, 1});
        CHECK(texts(by_sentence) == texts(by_chunk));
    }
}

TEST_CASE("milestone segments count newly passed tests") {
    const std::string code = "def f():\n    return 1";

    const auto two = milestone_segments(code, {true, false, true});
    REQUIRE(two.size() == 2);
    CHECK(two[0].index == 0);
    CHECK(two[1].index == 1);
    CHECK(two[0].text.find("# resolves test 0") == 0);
    CHECK(two[1].text.find("# resolves test 2") == 0);
    CHECK(two[0].text.find(code) != std::string::npos);

    CHECK(milestone_segments(code, {false, false}).empty());
    CHECK(milestone_segments(code, {true, true, true}).size() == 3);
    CHECK_THROWS_AS(milestone_segments(code, {}), ContractViolation);
}

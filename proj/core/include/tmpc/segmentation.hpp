#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tmpc/mdp.hpp"

namespace tmpc {

enum class SegmentMode {
    sentence,  // one segment per sentence
    chunk,     // groups of chunk_size sentences
    milestone, // abstract units (newly passed unit tests); see milestone_segments
};

const char* to_string(SegmentMode mode);
SegmentMode segment_mode_from_string(const std::string& name);

struct SegmenterSpec {
    SegmentMode mode = SegmentMode::sentence;
    int chunk_size = 1; // sentences per segment in chunk mode; ignored by milestone
};

// Rule-based sentence split on ., !, ? and their fullwidth CJK counterparts,
// terminators kept. A trailing run without a terminator forms a final
// sentence. Abbreviations ("e.g.") are not special-cased.
std::vector<std::string> split_sentences(std::string_view text);

// Splits a response into planning segments per `spec`. Sentence and chunk
// modes reproduce the input up to inter-segment whitespace. Throws
// EmptyResponseError on empty/whitespace-only input, ContractViolation on
// chunk_size < 1 or mode == milestone (which needs test results instead).
std::vector<Segment> segment_text(std::string_view response, const SegmenterSpec& spec);

// One abstract segment per newly passed test: the full candidate code
// annotated with the resolved test's index. All-failing candidates yield an
// empty list. Throws ContractViolation when test_results is empty.
std::vector<Segment> milestone_segments(std::string_view candidate_code,
                                        const std::vector<bool>& test_results);

} // namespace tmpc

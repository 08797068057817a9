#include "tmpc/segmentation.hpp"

#include <algorithm>
#include <cctype>

#include "tmpc/errors.hpp"

namespace tmpc {
namespace {

bool is_blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string trimmed(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) {
        ++begin;
    }
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) {
        --end;
    }
    return std::string(text.substr(begin, end - begin));
}

// Returns the byte length of the terminator starting at `pos`, or 0.
// Terminators: . ! ? and the fullwidth 。 ！ ？ (3-byte UTF-8 sequences).
std::size_t terminator_length(std::string_view text, std::size_t pos) {
    const char c = text[pos];
    if (c == '.' || c == '!' || c == '?') {
        return 1;
    }
    if (pos + 3 <= text.size()) {
        const auto b0 = static_cast<unsigned char>(text[pos]);
        const auto b1 = static_cast<unsigned char>(text[pos + 1]);
        const auto b2 = static_cast<unsigned char>(text[pos + 2]);
        if (b0 == 0xE3 && b1 == 0x80 && b2 == 0x82) {
            return 3; // 。
        }
        if (b0 == 0xEF && b1 == 0xBC && (b2 == 0x81 || b2 == 0x9F)) {
            return 3; // ！ or ？
        }
    }
    return 0;
}

} // namespace

const char* to_string(SegmentMode mode) {
    switch (mode) {
        case SegmentMode::sentence: return "sentence";
        case SegmentMode::chunk: return "chunk";
        case SegmentMode::milestone: return "milestone";
    }
    return "sentence";
}

SegmentMode segment_mode_from_string(const std::string& name) {
    if (name == "sentence") return SegmentMode::sentence;
    if (name == "chunk") return SegmentMode::chunk;
    if (name == "milestone") return SegmentMode::milestone;
    throw ContractViolation("unknown segment mode: " + name);
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t term = terminator_length(text, pos);
        if (term == 0) {
            ++pos;
            continue;
        }
        pos += term;
        // Attach any run of consecutive terminators ("...", "?!") to the
        // sentence they close.
        for (std::size_t t = terminator_length(text, pos); pos < text.size() && t != 0;
             t = terminator_length(text, pos)) {
            pos += t;
        }
        std::string sentence = trimmed(text.substr(start, pos - start));
        if (!sentence.empty()) {
            sentences.push_back(std::move(sentence));
        }
        start = pos;
    }
    if (start < text.size()) {
        std::string tail = trimmed(text.substr(start));
        if (!tail.empty()) {
            sentences.push_back(std::move(tail));
        }
    }
    return sentences;
}

std::vector<Segment> segment_text(std::string_view response, const SegmenterSpec& spec) {
    if (response.empty() || is_blank(response)) {
        throw EmptyResponseError("segment_text: response is empty");
    }
    if (spec.mode == SegmentMode::milestone) {
        throw ContractViolation("segment_text: milestone mode requires test results; "
                                "use milestone_segments");
    }
    if (spec.chunk_size < 1) {
        throw ContractViolation("segment_text: chunk_size must be >= 1");
    }

    const std::vector<std::string> sentences = split_sentences(response);
    const std::size_t group =
        spec.mode == SegmentMode::sentence ? 1 : static_cast<std::size_t>(spec.chunk_size);

    std::vector<Segment> segments;
    segments.reserve((sentences.size() + group - 1) / group);
    for (std::size_t i = 0; i < sentences.size(); i += group) {
        std::string text = sentences[i];
        for (std::size_t j = i + 1; j < std::min(i + group, sentences.size()); ++j) {
            text.push_back(' ');
            text += sentences[j];
        }
        segments.push_back(Segment{std::move(text), segments.size()});
    }
    return segments;
}

std::vector<Segment> milestone_segments(std::string_view candidate_code,
                                        const std::vector<bool>& test_results) {
    if (test_results.empty()) {
        throw ContractViolation("milestone_segments: test_results is empty");
    }
    std::vector<Segment> segments;
    for (std::size_t i = 0; i < test_results.size(); ++i) {
        if (!test_results[i]) {
            continue;
        }
        std::string text = "# resolves test " + std::to_string(i) + "\n";
        text += candidate_code;
        segments.push_back(Segment{std::move(text), segments.size()});
    }
    return segments;
}

} // namespace tmpc

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmpc/mdp.hpp"
#include "tmpc/segmentation.hpp"

namespace tmpc {

// A retrospectively identified high-reward unit. The payload is either a
// concrete text segment or a strategy directive (program synthesis stores the
// system prompt that produced a passing candidate, never raw code segments).
struct SubgoalEntry {
    enum class Kind { text_segment, directive };

    Kind kind = Kind::text_segment;
    Segment segment;        // valid when kind == text_segment
    std::string directive;  // valid when kind == directive
    double score = 0.0;
    std::string source_rollout;
    std::size_t iteration_found = 0;
    std::optional<std::string> aligned_source; // translation few-shot pairing
    double rollout_weight = 0.0;               // informational, set by tmpc_select

    const std::string& payload_text() const {
        return kind == Kind::text_segment ? segment.text : directive;
    }
};

// Bounded, reward-ordered buffer of subgoals. Entries keep insertion order;
// every entry scores at least threshold_alpha and payload texts are unique.
struct SubgoalBuffer {
    std::vector<SubgoalEntry> entries;
    std::size_t capacity = 3;
    double threshold_alpha = 0.0;
    // When set, a full buffer evicts *every* entry scoring strictly below the
    // newcomer instead of a single minimum. Off by default: multi-eviction can
    // drain the buffer down to one entry.
    bool literal_eviction = false;
};

double buffer_min_score(const SubgoalBuffer& buffer);

// Hindsight subgoal identification: entries for exactly those segments whose
// score clears alpha, order preserved, tagged with rollout provenance.
// Program-synthesis rollouts qualify as a whole (total_score > alpha) and
// yield a single directive entry carrying the rollout's system variant.
std::vector<SubgoalEntry> identify_subgoals(const Trajectory& rollout, double alpha);

// Buffer update rule. Candidates are processed in order; each is inserted
// while below capacity, otherwise replaces a minimum-score entry only when it
// strictly beats the minimum. Duplicate payload texts are skipped. Candidates
// below the buffer threshold throw ContractViolation. Value in, value out.
SubgoalBuffer update_buffer(SubgoalBuffer buffer, const std::vector<SubgoalEntry>& candidates);

// Subgoals to condition the next generation on. Translation adaptively draws
// min(|buffer|, iteration + 5) entries without replacement (seeded); other
// tasks pass the whole buffer through.
std::vector<SubgoalEntry> sample_subgoals(const SubgoalBuffer& buffer, std::size_t iteration,
                                          TaskKind task_kind, std::uint64_t rng_seed);

// Pairs translation segment entries with the source segment at the same
// index, splitting the source with the same spec. Entries whose index has no
// source counterpart are dropped.
std::vector<SubgoalEntry> attach_aligned_sources(std::vector<SubgoalEntry> entries,
                                                 const std::string& source_text,
                                                 const SegmenterSpec& spec);

} // namespace tmpc

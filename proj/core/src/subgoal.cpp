#include "tmpc/subgoal.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "tmpc/errors.hpp"
#include "tmpc/rng.hpp"

namespace tmpc {
namespace {

bool contains_payload(const SubgoalBuffer& buffer, const std::string& payload) {
    return std::any_of(buffer.entries.begin(), buffer.entries.end(),
                       [&](const SubgoalEntry& e) { return e.payload_text() == payload; });
}

// Eviction victim: minimum score, ties broken by oldest iteration_found then
// insertion order.
std::size_t min_entry_index(const SubgoalBuffer& buffer) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < buffer.entries.size(); ++i) {
        const SubgoalEntry& cur = buffer.entries[i];
        const SubgoalEntry& min = buffer.entries[best];
        if (cur.score < min.score ||
            (cur.score == min.score && cur.iteration_found < min.iteration_found)) {
            best = i;
        }
    }
    return best;
}

} // namespace

double buffer_min_score(const SubgoalBuffer& buffer) {
    double min = std::numeric_limits<double>::infinity();
    for (const SubgoalEntry& e : buffer.entries) {
        min = std::min(min, e.score);
    }
    return min;
}

std::vector<SubgoalEntry> identify_subgoals(const Trajectory& rollout, double alpha) {
    std::vector<SubgoalEntry> out;

    if (rollout.origin.task_kind == TaskKind::program_synthesis) {
        // Promising state rule: any pass rate above the threshold qualifies,
        // and the payload is the strategy that produced it.
        if (!rollout.total_score.has_value()) {
            throw UnscoredTrajectoryError("identify_subgoals: rollout " + rollout.rollout_id +
                                          " has no total score");
        }
        if (*rollout.total_score > alpha && !rollout.system_variant.empty()) {
            SubgoalEntry entry;
            entry.kind = SubgoalEntry::Kind::directive;
            entry.directive = rollout.system_variant;
            entry.score = *rollout.total_score;
            entry.source_rollout = rollout.rollout_id;
            entry.iteration_found = rollout.iteration;
            out.push_back(std::move(entry));
        }
        return out;
    }

    if (!rollout.segment_scores.has_value()) {
        throw UnscoredTrajectoryError("identify_subgoals: rollout " + rollout.rollout_id +
                                      " has no segment scores");
    }
    const auto& scores = *rollout.segment_scores;
    for (std::size_t i = 0; i < rollout.segments.size(); ++i) {
        if (scores[i] < alpha) {
            continue;
        }
        SubgoalEntry entry;
        entry.kind = SubgoalEntry::Kind::text_segment;
        entry.segment = rollout.segments[i];
        entry.score = scores[i];
        entry.source_rollout = rollout.rollout_id;
        entry.iteration_found = rollout.iteration;
        out.push_back(std::move(entry));
    }
    return out;
}

SubgoalBuffer update_buffer(SubgoalBuffer buffer, const std::vector<SubgoalEntry>& candidates) {
    for (const SubgoalEntry& candidate : candidates) {
        if (candidate.score < buffer.threshold_alpha) {
            throw ContractViolation("update_buffer: candidate score " +
                                    std::to_string(candidate.score) + " below threshold " +
                                    std::to_string(buffer.threshold_alpha));
        }
        if (contains_payload(buffer, candidate.payload_text())) {
            continue;
        }
        if (buffer.entries.size() < buffer.capacity) {
            buffer.entries.push_back(candidate);
            continue;
        }
        if (buffer.literal_eviction) {
            const std::size_t before = buffer.entries.size();
            std::erase_if(buffer.entries,
                          [&](const SubgoalEntry& e) { return e.score < candidate.score; });
            if (buffer.entries.size() < before) {
                buffer.entries.push_back(candidate);
            }
            continue;
        }
        const std::size_t victim = min_entry_index(buffer);
        if (candidate.score > buffer.entries[victim].score) {
            buffer.entries.erase(buffer.entries.begin() +
                                 static_cast<std::ptrdiff_t>(victim));
            buffer.entries.push_back(candidate);
        }
    }
    return buffer;
}

std::vector<SubgoalEntry> sample_subgoals(const SubgoalBuffer& buffer, std::size_t iteration,
                                          TaskKind task_kind, std::uint64_t rng_seed) {
    if (task_kind != TaskKind::translation) {
        return buffer.entries;
    }
    const std::size_t want = std::min(buffer.entries.size(), iteration + 5);
    std::vector<std::size_t> order(buffer.entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(rng_seed);
    std::vector<SubgoalEntry> out;
    out.reserve(want);
    for (std::size_t i = 0; i < want; ++i) {
        const std::size_t pick = i + rng.next_index(order.size() - i);
        std::swap(order[i], order[pick]);
        out.push_back(buffer.entries[order[i]]);
    }
    return out;
}

std::vector<SubgoalEntry> attach_aligned_sources(std::vector<SubgoalEntry> entries,
                                                 const std::string& source_text,
                                                 const SegmenterSpec& spec) {
    const std::vector<Segment> source_segments = segment_text(source_text, spec);
    std::vector<SubgoalEntry> out;
    out.reserve(entries.size());
    for (SubgoalEntry& entry : entries) {
        if (entry.kind != SubgoalEntry::Kind::text_segment) {
            out.push_back(std::move(entry));
            continue;
        }
        if (entry.segment.index >= source_segments.size()) {
            continue; // no source counterpart; cannot form a few-shot pair
        }
        entry.aligned_source = source_segments[entry.segment.index].text;
        out.push_back(std::move(entry));
    }
    return out;
}

} // namespace tmpc

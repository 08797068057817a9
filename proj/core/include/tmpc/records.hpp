#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tmpc {

struct BufferEntrySnapshot {
    std::string payload_digest; // content hash, not the payload itself
    double score = 0.0;
};

// One line of a run trace. Every rollout yields one "rollout" record carrying
// its scores and the buffer state after the rollout's update; each run ends
// with one "summary" record carrying the final best score.
struct RunRecord {
    std::string run_id;
    std::string prompt_id;
    std::string method; // tmpc | best_of_n | naive_refine | oracle
    std::string event;  // rollout | summary
    std::size_t iteration = 0;
    std::size_t rollout_index = 0;
    double total_score = 0.0;
    std::vector<double> segment_scores;
    std::vector<BufferEntrySnapshot> buffer_snapshot;
    std::int64_t wall_time_ms = 0;
    std::uint64_t seed = 0;
};

// Compact single-line JSON with deterministically ordered keys.
std::string to_json_line(const RunRecord& record);
RunRecord record_from_json_line(const std::string& line);

std::string payload_digest(const std::string& payload);

} // namespace tmpc

#pragma once

#include <functional>
#include <limits>

#include "tmpc/aggregate.hpp"
#include "tmpc/generators.hpp"
#include "tmpc/records.hpp"
#include "tmpc/rewards.hpp"
#include "tmpc/segmentation.hpp"
#include "tmpc/subgoal.hpp"

namespace tmpc {

// How segment-level score requests frame their context. The prefix form
// scores each segment given the prompt plus everything generated before it;
// the alone form scores it against the prompt only.
enum class SegmentContext { prefix, segment_alone };

struct PlannerConfig {
    int iterations = 3;  // T
    int rollouts = 3;    // K
    double alpha = 0.0;
    std::size_t buffer_capacity = 3;
    SegmenterSpec segmenter{SegmentMode::chunk, 3};
    AggregationConfig aggregation;
    std::uint64_t seed = 0;
    std::vector<std::string> system_prompt_portfolio;
    bool literal_eviction = false;
    SegmentContext segment_context = SegmentContext::prefix;
    SamplingParams sampling;
    int max_parallel_rollouts = 1; // K rollouts per iteration may run concurrently
};

void validate_config(const PlannerConfig& config);

struct PlanResult {
    Trajectory best;
    std::vector<Trajectory> all_candidates;
    SubgoalBuffer buffer_final;
    std::vector<double> best_by_iteration; // running best after the initial
                                           // rollout and after each iteration
    std::size_t generation_count = 0;
};

// Optional per-event hook; the harness uses it to stream trace records. The
// planner fills everything except run/prompt identity and method.
using RecordSink = std::function<void(const RunRecord&)>;

// The iterative subgoal-buffered planning loop: one initial rollout, then
// `iterations` rounds of K subgoal-conditioned rollouts, with hindsight
// subgoal identification and buffer updates after every rollout. Returns the
// argmax-scoring candidate; ties go to the earliest generation. Failed
// rollouts are retried once and then skipped; an iteration with zero usable
// rollouts aborts the run.
PlanResult plan(const PromptState& prompt, Generator& generator, Reward& reward,
                const PlannerConfig& config, const RecordSink& sink = {});

// Baseline: n independent unconditioned rollouts, argmax by total score.
PlanResult best_of_n(const PromptState& prompt, Generator& generator, Reward& reward, int n,
                     std::uint64_t seed, const RecordSink& sink = {});

// Degraded configuration: whole-response segments and a single-slot buffer,
// so each iteration conditions only on the best full response so far.
PlanResult naive_refine(const PromptState& prompt, Generator& generator, Reward& reward,
                        PlannerConfig config, const RecordSink& sink = {});

constexpr std::size_t kEnumerationGuard = 1000000; // max sequences per exhaustive search

// Exhaustive optimum over all action sequences of the given length; ties
// break lexicographically. Throws IntractableSearchError past the guard.
Trajectory brute_force_optimum(const SyntheticEnv& env, std::size_t horizon);

// Receding-horizon planning: exhaustively optimize the next `horizon_h`
// actions, commit the first `commit_j`, repeat to episode end.
Trajectory receding_horizon_plan(const SyntheticEnv& env, std::size_t horizon_h,
                                 std::size_t commit_j);

// Prompt text used for synthetic-environment planning runs.
std::string env_prompt_text(const SyntheticEnv& env);

} // namespace tmpc

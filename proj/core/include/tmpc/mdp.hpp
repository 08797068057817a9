#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tmpc {

enum class TaskKind {
    translation,
    long_form,
    program_synthesis,
    synthetic,
};

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

// Initial state of a planning run: the prompt and the task it belongs to.
struct PromptState {
    std::string prompt_text;
    TaskKind task_kind = TaskKind::synthetic;
    // Program synthesis only: public test cases rendered into code prompts.
    std::string public_tests;
};

// Throws ContractViolation if prompt_text is empty.
PromptState make_prompt_state(std::string prompt_text, TaskKind kind);

// One action: a text unit at position `index` within its trajectory.
struct Segment {
    std::string text;
    std::size_t index = 0;
};

// A full (possibly partial) generation viewed as an ordered action sequence.
// States are implicit: the state at step t is (origin, segments[0..t)).
struct Trajectory {
    PromptState origin;
    std::vector<Segment> segments;
    std::optional<std::vector<double>> segment_scores;
    std::optional<double> total_score;
    std::string rollout_id;
    std::size_t iteration = 0;
    // System-prompt variant that produced this rollout; the subgoal payload
    // for program synthesis, where buffers store directives rather than code.
    std::string system_variant;
};

// Deterministic transition: returns a copy of `prefix` extended by `action`.
// The action's index must equal the current segment count.
Trajectory advance(const Trajectory& prefix, Segment action);

// Cumulative reward: the sum of segment scores. Throws UnscoredTrajectoryError
// when segment scores are absent.
double trajectory_utility(const Trajectory& traj);

// Segment texts joined with single spaces.
std::string trajectory_text(const Trajectory& traj);

} // namespace tmpc

#include "tmpc/mdp.hpp"

#include <numeric>
#include <utility>

#include "tmpc/errors.hpp"

namespace tmpc {

const char* to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::translation: return "translation";
        case TaskKind::long_form: return "long_form";
        case TaskKind::program_synthesis: return "program_synthesis";
        case TaskKind::synthetic: return "synthetic";
    }
    return "synthetic";
}

TaskKind task_kind_from_string(const std::string& name) {
    if (name == "translation") return TaskKind::translation;
    if (name == "long_form") return TaskKind::long_form;
    if (name == "program_synthesis") return TaskKind::program_synthesis;
    if (name == "synthetic") return TaskKind::synthetic;
    throw ContractViolation("unknown task kind: " + name);
}

PromptState make_prompt_state(std::string prompt_text, TaskKind kind) {
    if (prompt_text.empty()) {
        throw ContractViolation("prompt_text must be non-empty");
    }
    return PromptState{std::move(prompt_text), kind};
}

Trajectory advance(const Trajectory& prefix, Segment action) {
    if (action.index != prefix.segments.size()) {
        throw ContractViolation("advance: action index " + std::to_string(action.index) +
                                " does not match segment count " +
                                std::to_string(prefix.segments.size()));
    }
    Trajectory out = prefix;
    out.segments.push_back(std::move(action));
    return out;
}

double trajectory_utility(const Trajectory& traj) {
    if (!traj.segment_scores.has_value()) {
        throw UnscoredTrajectoryError("trajectory_utility: segment scores missing (rollout " +
                                      traj.rollout_id + ")");
    }
    const auto& scores = *traj.segment_scores;
    return std::accumulate(scores.begin(), scores.end(), 0.0);
}

std::string trajectory_text(const Trajectory& traj) {
    std::string out;
    for (std::size_t i = 0; i < traj.segments.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out += traj.segments[i].text;
    }
    return out;
}

} // namespace tmpc

#include "tmpc/planner.hpp"

#include <algorithm>
#include <chrono>
#include <future>

#include "tmpc/errors.hpp"
#include "tmpc/prompting.hpp"
#include "tmpc/rng.hpp"

namespace tmpc {
namespace {

struct RolloutOutcome {
    bool ok = false;
    bool backend_failure = false;
    std::string error;
    Trajectory trajectory;
    std::uint64_t request_seed = 0;
    std::int64_t wall_time_ms = 0;
    std::size_t rollout_index_hint = 0;
};

PromptPlan build_prompt_for_task(const PromptState& prompt,
                                 const std::vector<SubgoalEntry>& subgoals,
                                 const std::string& variant) {
    switch (prompt.task_kind) {
        case TaskKind::translation:
            return build_translation_prompt(prompt.prompt_text, subgoals, variant);
        case TaskKind::long_form:
            return build_longform_prompt(prompt.prompt_text, subgoals, variant);
        case TaskKind::program_synthesis:
            return build_code_prompt(prompt.prompt_text, prompt.public_tests, subgoals, variant);
        case TaskKind::synthetic:
            return build_synthetic_prompt(prompt.prompt_text, subgoals, variant);
    }
    throw ContractViolation("build_prompt_for_task: unknown task kind");
}

// Scores a completion at trajectory and segment level and wraps it into a
// trajectory value. Program synthesis scores the extracted code's pass rate
// and represents progress as milestone segments whose scores sum to the rate.
Trajectory score_completion(const PromptState& prompt, Reward& reward,
                            const PlannerConfig& config, const std::string& completion,
                            std::size_t iteration, const std::string& variant,
                            const std::string& rollout_id) {
    Trajectory traj;
    traj.origin = prompt;
    traj.rollout_id = rollout_id;
    traj.iteration = iteration;
    traj.system_variant = variant;

    if (prompt.task_kind == TaskKind::program_synthesis) {
        const std::string code = extract_code_block(completion);
        const ScoreDetail detail =
            reward.score_detail({prompt.prompt_text, code, Granularity::trajectory});
        traj.total_score = detail.score;
        std::vector<double> scores;
        if (detail.per_test.has_value() && !detail.per_test->empty()) {
            traj.segments = milestone_segments(code, *detail.per_test);
            if (!traj.segments.empty()) {
                scores.assign(traj.segments.size(),
                              detail.score / static_cast<double>(traj.segments.size()));
            }
        } else {
            traj.segments.push_back(Segment{code, 0});
            scores.push_back(detail.score);
        }
        traj.segment_scores = std::move(scores);
        return traj;
    }

    traj.segments = segment_text(completion, config.segmenter);
    std::vector<double> scores;
    scores.reserve(traj.segments.size());
    std::string prefix;
    for (const Segment& segment : traj.segments) {
        std::string context = prompt.prompt_text;
        if (config.segment_context == SegmentContext::prefix && !prefix.empty()) {
            context += "\n" + prefix;
        }
        scores.push_back(reward.score({context, segment.text, Granularity::segment}));
        if (!prefix.empty()) {
            prefix.push_back(' ');
        }
        prefix += segment.text;
    }
    traj.segment_scores = std::move(scores);
    traj.total_score = reward.score({prompt.prompt_text, completion, Granularity::trajectory});
    return traj;
}

RolloutOutcome attempt_rollout(const PromptState& prompt, Generator& generator, Reward& reward,
                               const PlannerConfig& config,
                               const std::vector<SubgoalEntry>& subgoals, std::size_t iteration,
                               std::size_t index, const std::string& rollout_id) {
    const std::string& variant =
        config.system_prompt_portfolio[index % config.system_prompt_portfolio.size()];
    const PromptPlan plan = build_prompt_for_task(prompt, subgoals, variant);

    GeneratorRequest request;
    request.system_prompt = plan.system_prompt;
    request.user_prompt = plan.user_prompt;
    request.sampling = config.sampling;
    request.seed = mix_seed(config.seed, iteration, index);

    RolloutOutcome outcome;
    outcome.request_seed = *request.seed;
    const auto started = std::chrono::steady_clock::now();
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            const std::string completion = generator.generate(request);
            outcome.trajectory = score_completion(prompt, reward, config, completion, iteration,
                                                  variant, rollout_id);
            outcome.ok = true;
            outcome.backend_failure = false;
            break;
        } catch (const BackendError& e) {
            outcome.backend_failure = true;
            outcome.error = e.what();
        } catch (const EmptyResponseError& e) {
            outcome.backend_failure = false;
            outcome.error = e.what();
        }
    }
    outcome.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();
    return outcome;
}

std::vector<BufferEntrySnapshot> snapshot_of(const SubgoalBuffer& buffer) {
    std::vector<BufferEntrySnapshot> out;
    out.reserve(buffer.entries.size());
    for (const SubgoalEntry& entry : buffer.entries) {
        out.push_back(BufferEntrySnapshot{payload_digest(entry.payload_text()), entry.score});
    }
    return out;
}

void emit_rollout_record(const RecordSink& sink, const RolloutOutcome& outcome,
                         std::size_t iteration, std::size_t index,
                         const SubgoalBuffer& buffer) {
    if (!sink) {
        return;
    }
    RunRecord record;
    record.event = "rollout";
    record.iteration = iteration;
    record.rollout_index = index;
    record.total_score = outcome.trajectory.total_score.value_or(0.0);
    record.segment_scores = outcome.trajectory.segment_scores.value_or(std::vector<double>{});
    record.buffer_snapshot = snapshot_of(buffer);
    record.wall_time_ms = outcome.wall_time_ms;
    record.seed = outcome.request_seed;
    sink(record);
}

// Hindsight update phase for one batch of scored rollouts: MPPI weights are
// attached as ranking metadata, then each rollout's qualifying subgoals are
// folded into the buffer in generation order.
void update_phase(const PromptState& prompt, const PlannerConfig& config,
                  const std::vector<RolloutOutcome*>& batch, SubgoalBuffer& buffer,
                  const RecordSink& sink) {
    std::vector<double> utilities;
    utilities.reserve(batch.size());
    for (const RolloutOutcome* outcome : batch) {
        utilities.push_back(trajectory_utility(outcome->trajectory));
    }
    const std::vector<double> weights =
        utilities.empty() ? std::vector<double>{}
                          : mppi_weights(utilities, config.aggregation.lambda);

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const RolloutOutcome* outcome = batch[i];
        std::vector<SubgoalEntry> entries =
            identify_subgoals(outcome->trajectory, config.alpha);
        for (SubgoalEntry& entry : entries) {
            entry.rollout_weight = weights[i];
        }
        if (prompt.task_kind == TaskKind::translation) {
            entries = attach_aligned_sources(std::move(entries), prompt.prompt_text,
                                             config.segmenter);
        }
        buffer = update_buffer(std::move(buffer), entries);
        emit_rollout_record(sink, *outcome, outcome->trajectory.iteration,
                            outcome->rollout_index_hint, buffer);
    }
}

double best_total(const std::vector<Trajectory>& candidates) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Trajectory& t : candidates) {
        best = std::max(best, t.total_score.value_or(-std::numeric_limits<double>::infinity()));
    }
    return best;
}

const Trajectory& earliest_argmax(const std::vector<Trajectory>& candidates) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].total_score.value_or(0.0) >
            candidates[best].total_score.value_or(0.0)) {
            best = i;
        }
    }
    return candidates[best];
}

} // namespace

void validate_config(const PlannerConfig& config) {
    if (config.iterations < 1) {
        throw ContractViolation("PlannerConfig: iterations must be >= 1");
    }
    if (config.rollouts < 1) {
        throw ContractViolation("PlannerConfig: rollouts must be >= 1");
    }
    if (config.buffer_capacity < 1) {
        throw ContractViolation("PlannerConfig: buffer_capacity must be >= 1");
    }
    if (config.system_prompt_portfolio.empty()) {
        throw ContractViolation("PlannerConfig: system_prompt_portfolio must be non-empty");
    }
    if (!(config.aggregation.lambda > 0.0)) {
        throw ContractViolation("PlannerConfig: aggregation lambda must be positive");
    }
}

PlanResult plan(const PromptState& prompt, Generator& generator, Reward& reward,
                const PlannerConfig& config, const RecordSink& sink) {
    validate_config(config);
    if (prompt.prompt_text.empty()) {
        throw ContractViolation("plan: prompt_text must be non-empty");
    }

    SubgoalBuffer buffer;
    buffer.capacity = config.buffer_capacity;
    buffer.threshold_alpha = config.alpha;
    buffer.literal_eviction = config.literal_eviction;

    PlanResult result;

    auto run_batch = [&](std::size_t iteration, std::size_t count,
                         const auto& subgoals_for) -> std::vector<RolloutOutcome> {
        std::vector<RolloutOutcome> outcomes(count);
        const int stride = std::max(1, config.max_parallel_rollouts);
        for (std::size_t base = 0; base < count; base += static_cast<std::size_t>(stride)) {
            const std::size_t end = std::min(count, base + static_cast<std::size_t>(stride));
            std::vector<std::future<RolloutOutcome>> futures;
            futures.reserve(end - base);
            for (std::size_t i = base; i < end; ++i) {
                futures.push_back(std::async(std::launch::async, [&, i] {
                    const std::string rollout_id = "i" + std::to_string(iteration) + "-r" +
                                                   std::to_string(i);
                    return attempt_rollout(prompt, generator, reward, config, subgoals_for(i),
                                           iteration, i, rollout_id);
                }));
            }
            for (std::size_t i = base; i < end; ++i) {
                outcomes[i] = futures[i - base].get();
                outcomes[i].rollout_index_hint = i;
            }
        }
        return outcomes;
    };

    // Initial unconditioned rollout.
    std::vector<RolloutOutcome> initial =
        run_batch(0, 1, [](std::size_t) { return std::vector<SubgoalEntry>{}; });
    if (!initial[0].ok) {
        if (initial[0].backend_failure) {
            throw BackendError("plan: initial rollout failed after retry: " + initial[0].error);
        }
        throw DegenerateRunError("plan: initial rollout produced no usable output: " +
                                 initial[0].error);
    }
    result.all_candidates.push_back(initial[0].trajectory);
    {
        std::vector<RolloutOutcome*> batch{&initial[0]};
        update_phase(prompt, config, batch, buffer, sink);
    }
    result.best_by_iteration.push_back(best_total(result.all_candidates));

    for (int t = 1; t <= config.iterations; ++t) {
        const auto iteration = static_cast<std::size_t>(t);
        auto subgoals_for = [&](std::size_t i) {
            return sample_subgoals(buffer, iteration, prompt.task_kind,
                                   mix_seed(config.seed ^ 0x5A5Aull, iteration, i));
        };
        std::vector<RolloutOutcome> outcomes =
            run_batch(iteration, static_cast<std::size_t>(config.rollouts), subgoals_for);

        std::vector<RolloutOutcome*> succeeded;
        std::string last_backend_error;
        bool saw_backend_error = false;
        for (RolloutOutcome& outcome : outcomes) {
            if (outcome.ok) {
                succeeded.push_back(&outcome);
            } else if (outcome.backend_failure) {
                saw_backend_error = true;
                last_backend_error = outcome.error;
            }
        }
        if (succeeded.empty()) {
            if (saw_backend_error) {
                throw BackendError("plan: iteration " + std::to_string(t) +
                                   " lost every rollout to backend failures; last: " +
                                   last_backend_error);
            }
            throw DegenerateRunError("plan: iteration " + std::to_string(t) +
                                     " produced no usable rollouts");
        }
        for (const RolloutOutcome* outcome : succeeded) {
            result.all_candidates.push_back(outcome->trajectory);
        }
        update_phase(prompt, config, succeeded, buffer, sink);
        result.best_by_iteration.push_back(best_total(result.all_candidates));
    }

    result.best = earliest_argmax(result.all_candidates);
    result.buffer_final = std::move(buffer);
    result.generation_count = result.all_candidates.size();
    return result;
}

PlanResult best_of_n(const PromptState& prompt, Generator& generator, Reward& reward, int n,
                     std::uint64_t seed, const RecordSink& sink) {
    if (n < 1) {
        throw ContractViolation("best_of_n: n must be >= 1");
    }
    if (prompt.prompt_text.empty()) {
        throw ContractViolation("best_of_n: prompt_text must be non-empty");
    }

    const std::vector<std::string>* portfolio = nullptr;
    switch (prompt.task_kind) {
        case TaskKind::translation: portfolio = &translation_portfolio(); break;
        case TaskKind::long_form: portfolio = &longform_portfolio(); break;
        case TaskKind::program_synthesis: portfolio = &code_portfolio(); break;
        case TaskKind::synthetic: portfolio = &synthetic_portfolio(); break;
    }
    const std::string& variant = portfolio->front();

    PlanResult result;
    result.buffer_final.capacity = 1;
    std::string last_error;
    bool saw_backend_error = false;

    for (int i = 0; i < n; ++i) {
        const PromptPlan pp = build_prompt_for_task(prompt, {}, variant);
        GeneratorRequest request;
        request.system_prompt = pp.system_prompt;
        request.user_prompt = pp.user_prompt;
        request.seed = mix_seed(seed ^ 0xB0F0ull, static_cast<std::uint64_t>(i), 0);

        RolloutOutcome outcome;
        outcome.request_seed = *request.seed;
        const auto started = std::chrono::steady_clock::now();
        for (int attempt = 0; attempt < 2; ++attempt) {
            try {
                const std::string completion = generator.generate(request);
                Trajectory traj;
                traj.origin = prompt;
                traj.rollout_id = "bon-r" + std::to_string(i);
                traj.iteration = static_cast<std::size_t>(i);
                traj.system_variant = variant;
                std::string body = completion;
                if (prompt.task_kind == TaskKind::program_synthesis) {
                    body = extract_code_block(completion);
                    traj.segments.push_back(Segment{body, 0});
                } else {
                    traj.segments = segment_text(completion, SegmenterSpec{});
                }
                traj.total_score =
                    reward.score({prompt.prompt_text, body, Granularity::trajectory});
                outcome.trajectory = std::move(traj);
                outcome.ok = true;
                break;
            } catch (const BackendError& e) {
                outcome.backend_failure = true;
                outcome.error = e.what();
            } catch (const EmptyResponseError& e) {
                outcome.error = e.what();
            }
        }
        outcome.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started)
                                   .count();
        if (!outcome.ok) {
            saw_backend_error = saw_backend_error || outcome.backend_failure;
            last_error = outcome.error;
            continue;
        }
        result.all_candidates.push_back(outcome.trajectory);
        emit_rollout_record(sink, outcome, static_cast<std::size_t>(i), 0,
                            result.buffer_final);
        result.best_by_iteration.push_back(best_total(result.all_candidates));
    }

    if (result.all_candidates.empty()) {
        if (saw_backend_error) {
            throw BackendError("best_of_n: every rollout failed; last: " + last_error);
        }
        throw DegenerateRunError("best_of_n: every rollout was empty");
    }
    result.best = earliest_argmax(result.all_candidates);
    result.generation_count = result.all_candidates.size();
    return result;
}

PlanResult naive_refine(const PromptState& prompt, Generator& generator, Reward& reward,
                        PlannerConfig config, const RecordSink& sink) {
    config.buffer_capacity = 1;
    config.segmenter = SegmenterSpec{SegmentMode::chunk, std::numeric_limits<int>::max()};
    return plan(prompt, generator, reward, config, sink);
}

std::string env_prompt_text(const SyntheticEnv& env) {
    return "Reconstruct the hidden segment sequence; env " + std::to_string(env.seed) + ".";
}

namespace {

Trajectory env_trajectory(const SyntheticEnv& env, const std::vector<std::size_t>& actions,
                          std::string rollout_id) {
    Trajectory traj;
    traj.origin = PromptState{env_prompt_text(env), TaskKind::synthetic};
    std::vector<double> scores;
    scores.reserve(actions.size());
    for (std::size_t t = 0; t < actions.size(); ++t) {
        traj.segments.push_back(Segment{env.alphabet[actions[t]] + ".", t});
        scores.push_back(env_step_reward(env, actions, t));
    }
    traj.segment_scores = std::move(scores);
    traj.total_score = env_sequence_utility(env, actions);
    traj.rollout_id = std::move(rollout_id);
    return traj;
}

std::size_t checked_power(std::size_t base, std::size_t exponent) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < exponent; ++i) {
        if (total > kEnumerationGuard / base) {
            return kEnumerationGuard + 1;
        }
        total *= base;
    }
    return total;
}

// Lexicographic odometer enumeration; keeps the first maximizer, which is the
// lexicographically smallest one.
template <typename Score>
std::vector<std::size_t> enumerate_best(std::size_t alphabet, std::size_t length,
                                        const Score& score) {
    std::vector<std::size_t> digits(length, 0);
    std::vector<std::size_t> best = digits;
    double best_utility = score(digits);
    for (;;) {
        std::size_t pos = length;
        while (pos > 0) {
            --pos;
            if (++digits[pos] < alphabet) {
                break;
            }
            digits[pos] = 0;
            if (pos == 0) {
                return best;
            }
        }
        const double utility = score(digits);
        if (utility > best_utility) {
            best_utility = utility;
            best = digits;
        }
    }
}

} // namespace

Trajectory brute_force_optimum(const SyntheticEnv& env, std::size_t horizon) {
    validate_env(env);
    if (horizon == 0) {
        throw ContractViolation("brute_force_optimum: horizon must be positive");
    }
    if (checked_power(env.alphabet.size(), horizon) > kEnumerationGuard) {
        throw IntractableSearchError("brute_force_optimum: |alphabet|^horizon exceeds " +
                                     std::to_string(kEnumerationGuard));
    }
    const std::vector<std::size_t> best =
        enumerate_best(env.alphabet.size(), horizon,
                       [&](const std::vector<std::size_t>& actions) {
                           return env_sequence_utility(env, actions);
                       });
    return env_trajectory(env, best, "oracle-brute");
}

Trajectory receding_horizon_plan(const SyntheticEnv& env, std::size_t horizon_h,
                                 std::size_t commit_j) {
    validate_env(env);
    if (horizon_h == 0 || commit_j == 0 || commit_j > horizon_h) {
        throw ContractViolation("receding_horizon_plan: need 1 <= commit_j <= horizon_h");
    }
    const std::size_t max_window = std::min(horizon_h, env.episode_length);
    if (checked_power(env.alphabet.size(), max_window) > kEnumerationGuard) {
        throw IntractableSearchError("receding_horizon_plan: per-step enumeration exceeds " +
                                     std::to_string(kEnumerationGuard));
    }

    std::vector<std::size_t> committed;
    while (committed.size() < env.episode_length) {
        const std::size_t window = std::min(horizon_h, env.episode_length - committed.size());
        const std::size_t offset = committed.size();
        const std::vector<std::size_t> local = enumerate_best(
            env.alphabet.size(), window, [&](const std::vector<std::size_t>& tail) {
                std::vector<std::size_t> joint = committed;
                joint.insert(joint.end(), tail.begin(), tail.end());
                double utility = 0.0;
                for (std::size_t t = offset; t < joint.size(); ++t) {
                    utility += env_step_reward(env, joint, t);
                }
                return utility;
            });
        const std::size_t take = std::min(commit_j, window);
        committed.insert(committed.end(), local.begin(),
                         local.begin() + static_cast<std::ptrdiff_t>(take));
    }
    return env_trajectory(env, committed, "oracle-rh");
}

} // namespace tmpc

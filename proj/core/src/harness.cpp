#include "tmpc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "tmpc/errors.hpp"
#include "tmpc/prompting.hpp"
#include "tmpc/rng.hpp"

namespace tmpc {
namespace {

namespace fs = std::filesystem;

std::string fmt(double value) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << value;
    return out.str();
}

RewardShape reward_shape_from_string(const std::string& name) {
    if (name == "per_segment") return RewardShape::per_segment;
    if (name == "delayed_suffix") return RewardShape::delayed_suffix;
    throw ContractViolation("unknown reward_shape: " + name);
}

const std::vector<std::string>& default_portfolio(TaskKind task) {
    switch (task) {
        case TaskKind::translation: return translation_portfolio();
        case TaskKind::long_form: return longform_portfolio();
        case TaskKind::program_synthesis: return code_portfolio();
        case TaskKind::synthetic: return synthetic_portfolio();
    }
    return synthetic_portfolio();
}

struct RunJob {
    std::string method;
    PromptEntry entry;
    std::uint64_t seed = 0;
};

struct RunOutput {
    std::vector<RunRecord> records;
    bool aborted = false;
    std::string error;
};

RunOutput execute_run(const ExperimentConfig& config, const RunJob& job) {
    RunOutput output;
    const std::string run_id = job.method + "-" + job.entry.prompt_id + "-s" +
                               std::to_string(job.seed);
    const bool deterministic_timing = config.generator.kind == "synthetic";

    try {
        PromptState prompt = job.entry.prompt;
        std::unique_ptr<Generator> generator;
        std::shared_ptr<Reward> reward;

        if (config.generator.kind == "synthetic") {
            const SyntheticEnv env = make_env_from_spec(config.generator.synthetic, job.seed);
            prompt = PromptState{env_prompt_text(env), TaskKind::synthetic};
            generator = std::make_unique<SyntheticGenerator>(env);
            if (config.reward.kind == "env_lexical") {
                reward = std::make_shared<LexicalEnvReward>(env, prompt.prompt_text);
            }
        } else if (config.generator.kind == "http") {
            generator = std::make_unique<HttpChatGenerator>(config.generator.http);
        } else {
            throw ContractViolation("unknown generator kind: " + config.generator.kind);
        }

        if (!reward) {
            if (config.reward.kind == "pass_rate") {
                TestSuite suite = job.entry.suite;
                suite.per_test_timeout = config.reward.per_test_timeout;
                reward = std::make_shared<PassRateReward>(std::move(suite),
                                                          config.reward.sandbox);
            } else if (config.reward.kind == "http") {
                reward = std::make_shared<HttpReward>(config.reward.http);
            } else if (config.reward.kind == "env_lexical") {
                throw ContractViolation("env_lexical reward requires a synthetic generator");
            } else {
                throw ContractViolation("unknown reward kind: " + config.reward.kind);
            }
        }
        if (config.reward.noise_sigma > 0.0) {
            reward = with_noise(std::move(reward), config.reward.noise_sigma,
                                mix_seed(config.reward.noise_seed, job.seed));
        }

        PlannerConfig planner_config = config.planner;
        planner_config.seed = job.seed;
        if (planner_config.system_prompt_portfolio.empty()) {
            planner_config.system_prompt_portfolio = default_portfolio(prompt.task_kind);
        }

        const RecordSink sink = [&](const RunRecord& raw) {
            RunRecord record = raw;
            record.run_id = run_id;
            record.prompt_id = job.entry.prompt_id;
            record.method = job.method;
            if (deterministic_timing) {
                record.wall_time_ms = 0;
            }
            output.records.push_back(std::move(record));
        };

        PlanResult result;
        if (job.method == "tmpc") {
            result = plan(prompt, *generator, *reward, planner_config, sink);
        } else if (job.method == "best_of_n") {
            result = best_of_n(prompt, *generator, *reward, config.best_of_n_budget, job.seed,
                               sink);
        } else if (job.method == "naive_refine") {
            result = naive_refine(prompt, *generator, *reward, planner_config, sink);
        } else {
            throw ContractViolation("unknown method: " + job.method);
        }

        RunRecord summary;
        summary.run_id = run_id;
        summary.prompt_id = job.entry.prompt_id;
        summary.method = job.method;
        summary.event = "summary";
        summary.iteration = result.best_by_iteration.empty()
                                ? 0
                                : result.best_by_iteration.size() - 1;
        summary.rollout_index = result.generation_count;
        summary.total_score = result.best.total_score.value_or(0.0);
        for (const SubgoalEntry& entry : result.buffer_final.entries) {
            summary.buffer_snapshot.push_back(
                BufferEntrySnapshot{payload_digest(entry.payload_text()), entry.score});
        }
        summary.seed = job.seed;
        output.records.push_back(std::move(summary));
    } catch (const std::exception& e) {
        output.aborted = true;
        output.error = e.what();
        RunRecord aborted;
        aborted.run_id = run_id;
        aborted.prompt_id = job.entry.prompt_id;
        aborted.method = job.method;
        aborted.event = "aborted";
        aborted.seed = job.seed;
        output.records.push_back(std::move(aborted));
    }
    return output;
}

} // namespace

SyntheticEnv make_env_from_spec(const SyntheticEnvSpec& spec, std::uint64_t seed) {
    return make_random_env(seed, spec.alphabet_size, spec.episode_length, spec.reuse_bias,
                           reward_shape_from_string(spec.reward_shape), spec.suffix_len,
                           spec.distinct_reference);
}

void validate_experiment_config(const ExperimentConfig& config) {
    if (config.methods.empty()) {
        throw ContractViolation("experiment: methods must be non-empty");
    }
    for (const std::string& method : config.methods) {
        if (method != "tmpc" && method != "best_of_n" && method != "naive_refine") {
            throw ContractViolation("experiment: unknown method " + method);
        }
    }
    if (config.repeat_seeds.empty()) {
        throw ContractViolation("experiment: repeat_seeds must be non-empty");
    }
    if (config.task_kind != TaskKind::synthetic) {
        if (config.dataset_path.empty()) {
            throw ContractViolation("experiment: dataset_path required for task " +
                                    std::string(to_string(config.task_kind)));
        }
        if (!fs::exists(config.dataset_path)) {
            throw ContractViolation("experiment: dataset_path does not exist: " +
                                    config.dataset_path);
        }
    }
    if (config.reward.kind == "pass_rate" && config.task_kind != TaskKind::program_synthesis) {
        throw ContractViolation("experiment: pass_rate reward requires program_synthesis");
    }
}

std::vector<PromptEntry> load_dataset(const ExperimentConfig& config) {
    std::vector<PromptEntry> entries;
    if (config.task_kind == TaskKind::synthetic) {
        // One logical prompt; the environment itself is drawn per seed.
        entries.push_back(PromptEntry{"env", PromptState{"synthetic", TaskKind::synthetic}, {}});
        return entries;
    }

    if (config.task_kind == TaskKind::program_synthesis) {
        const std::vector<MbppTask> tasks = load_mbpp_file(config.dataset_path);
        for (const MbppTask& task : tasks) {
            PromptEntry entry;
            entry.prompt_id = "task" + std::to_string(task.task_id);
            entry.prompt.task_kind = TaskKind::program_synthesis;
            entry.prompt.prompt_text = task.text;
            std::string tests;
            for (const TestCase& test : task.suite.cases) {
                tests += test.assertion + "\n";
            }
            if (!tests.empty()) {
                tests.pop_back();
            }
            entry.prompt.public_tests = std::move(tests);
            entry.suite = task.suite;
            entries.push_back(std::move(entry));
            if (config.prompt_limit > 0 &&
                entries.size() == static_cast<std::size_t>(config.prompt_limit)) {
                break;
            }
        }
        return entries;
    }

    std::ifstream in(config.dataset_path);
    if (!in) {
        throw ContractViolation("load_dataset: cannot open " + config.dataset_path);
    }
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        // Translation datasets may pair "source<TAB>reference"; the reference
        // is for external evaluation and is not used here.
        const std::size_t tab = line.find('\t');
        std::string text = tab == std::string::npos ? line : line.substr(0, tab);
        if (text.empty()) {
            continue;
        }
        PromptEntry entry;
        entry.prompt_id = "p" + std::to_string(index++);
        entry.prompt = PromptState{std::move(text), config.task_kind};
        entries.push_back(std::move(entry));
        if (config.prompt_limit > 0 &&
            entries.size() == static_cast<std::size_t>(config.prompt_limit)) {
            break;
        }
    }
    if (entries.empty()) {
        throw ContractViolation("load_dataset: no prompts in " + config.dataset_path);
    }
    return entries;
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool resume) {
    validate_experiment_config(config);
    const std::vector<PromptEntry> prompts = load_dataset(config);

    fs::create_directories(config.output_path);
    const std::string trace_path = (fs::path(config.output_path) / "traces.jsonl").string();
    const std::string summary_path = (fs::path(config.output_path) / "summary.csv").string();

    std::vector<RunRecord> all_records;
    std::set<std::string> done;
    if (resume && fs::exists(trace_path)) {
        all_records = read_trace(trace_path);
        for (const RunRecord& record : all_records) {
            if (record.event == "summary") {
                done.insert(record.run_id);
            }
        }
    }

    std::vector<RunJob> jobs;
    for (const std::string& method : config.methods) {
        for (const PromptEntry& entry : prompts) {
            for (const std::uint64_t seed : config.repeat_seeds) {
                const std::string run_id =
                    method + "-" + entry.prompt_id + "-s" + std::to_string(seed);
                if (done.count(run_id) != 0) {
                    continue;
                }
                jobs.push_back(RunJob{method, entry, seed});
            }
        }
    }

    std::ofstream trace(trace_path, resume ? std::ios::app : std::ios::trunc);
    if (!trace) {
        throw InfrastructureError("run_experiment: cannot write " + trace_path);
    }

    ExperimentResult result;
    result.trace_path = trace_path;
    result.summary_path = summary_path;

    const auto flush_output = [&](RunOutput&& output) {
        for (RunRecord& record : output.records) {
            trace << to_json_line(record) << "\n";
            all_records.push_back(std::move(record));
        }
        if (output.aborted) {
            ++result.runs_aborted;
        } else {
            ++result.runs_completed;
        }
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1) {
        for (const RunJob& job : jobs) {
            flush_output(execute_run(config, job));
        }
    } else {
        // Bounded pool; outputs flush in job order so traces stay
        // deterministic regardless of completion order.
        for (std::size_t base = 0; base < jobs.size(); base += static_cast<std::size_t>(workers)) {
            const std::size_t end =
                std::min(jobs.size(), base + static_cast<std::size_t>(workers));
            std::vector<std::future<RunOutput>> futures;
            for (std::size_t i = base; i < end; ++i) {
                futures.push_back(std::async(std::launch::async,
                                             [&, i] { return execute_run(config, jobs[i]); }));
            }
            for (auto& future : futures) {
                flush_output(future.get());
            }
        }
    }
    trace.close();

    std::ofstream summary(summary_path, std::ios::trunc);
    if (!summary) {
        throw InfrastructureError("run_experiment: cannot write " + summary_path);
    }
    summary << summarize_records(all_records);
    return result;
}

std::vector<RunRecord> read_trace(const std::string& trace_path) {
    std::ifstream in(trace_path);
    if (!in) {
        throw ContractViolation("read_trace: cannot open " + trace_path);
    }
    std::vector<RunRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        records.push_back(record_from_json_line(line));
    }
    return records;
}

std::string summarize_records(const std::vector<RunRecord>& records) {
    struct RunCurve {
        std::string method;
        std::vector<double> best_by_iteration;
    };

    // Rebuild each run's running-best curve from its rollout records.
    std::vector<std::string> run_order;
    std::map<std::string, RunCurve> runs;
    for (const RunRecord& record : records) {
        if (record.event != "rollout") {
            continue;
        }
        auto it = runs.find(record.run_id);
        if (it == runs.end()) {
            run_order.push_back(record.run_id);
            it = runs.emplace(record.run_id, RunCurve{record.method, {}}).first;
        }
        RunCurve& curve = it->second;
        if (curve.best_by_iteration.size() <= record.iteration) {
            const double floor = curve.best_by_iteration.empty()
                                     ? -std::numeric_limits<double>::infinity()
                                     : curve.best_by_iteration.back();
            curve.best_by_iteration.resize(record.iteration + 1, floor);
        }
        double& slot = curve.best_by_iteration[record.iteration];
        slot = std::max(slot, record.total_score);
        for (std::size_t i = record.iteration + 1; i < curve.best_by_iteration.size(); ++i) {
            curve.best_by_iteration[i] = std::max(curve.best_by_iteration[i],
                                                  curve.best_by_iteration[i - 1]);
        }
    }

    std::vector<std::string> method_order;
    std::map<std::string, std::vector<const RunCurve*>> by_method;
    std::size_t max_iterations = 0;
    for (const std::string& run_id : run_order) {
        const RunCurve& curve = runs.at(run_id);
        if (by_method.find(curve.method) == by_method.end()) {
            method_order.push_back(curve.method);
        }
        by_method[curve.method].push_back(&curve);
        max_iterations = std::max(max_iterations, curve.best_by_iteration.size());
    }

    std::ostringstream out;
    out << "method,runs,mean_final,stdev_final";
    for (std::size_t i = 0; i < max_iterations; ++i) {
        out << ",iter_" << i << "_mean";
    }
    out << "\n";

    for (const std::string& method : method_order) {
        const auto& curves = by_method.at(method);
        std::vector<double> finals;
        finals.reserve(curves.size());
        for (const RunCurve* curve : curves) {
            finals.push_back(curve->best_by_iteration.back());
        }
        double mean = 0.0;
        for (double f : finals) {
            mean += f;
        }
        mean /= static_cast<double>(finals.size());
        double var = 0.0;
        for (double f : finals) {
            var += (f - mean) * (f - mean);
        }
        const double stdev =
            finals.size() > 1 ? std::sqrt(var / static_cast<double>(finals.size() - 1)) : 0.0;

        out << method << "," << finals.size() << "," << fmt(mean) << "," << fmt(stdev);
        for (std::size_t i = 0; i < max_iterations; ++i) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const RunCurve* curve : curves) {
                if (i < curve->best_by_iteration.size()) {
                    sum += curve->best_by_iteration[i];
                    ++count;
                }
            }
            out << ",";
            if (count > 0) {
                out << fmt(sum / static_cast<double>(count));
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string run_report(const std::string& trace_path, const std::string& summary_path) {
    const std::vector<RunRecord> records = read_trace(trace_path);
    std::ofstream out(summary_path, std::ios::trunc);
    if (!out) {
        throw InfrastructureError("run_report: cannot write " + summary_path);
    }
    out << summarize_records(records);
    return summary_path;
}

std::string oracle_sweep_csv(const OracleSweepSpec& spec) {
    std::ostringstream out;
    out << "env_seed,horizon,commit,optimum,receding,status\n";
    for (const std::uint64_t seed : spec.seeds) {
        const SyntheticEnv env = make_env_from_spec(spec.env, seed);
        for (const std::size_t horizon : spec.horizons) {
            for (const std::size_t commit : spec.commits) {
                out << seed << "," << horizon << "," << commit << ",";
                try {
                    const Trajectory optimum = brute_force_optimum(env, env.episode_length);
                    const Trajectory receding = receding_horizon_plan(env, horizon, commit);
                    out << fmt(*optimum.total_score) << "," << fmt(*receding.total_score)
                        << ",ok\n";
                } catch (const IntractableSearchError&) {
                    out << ",,guard_error\n";
                } catch (const ContractViolation& e) {
                    out << ",,invalid: " << e.what() << "\n";
                }
            }
        }
    }
    return out.str();
}

std::string run_oracle_sweep(const OracleSweepSpec& spec, const std::string& csv_path) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) {
        throw InfrastructureError("run_oracle_sweep: cannot write " + csv_path);
    }
    out << oracle_sweep_csv(spec);
    return csv_path;
}

} // namespace tmpc

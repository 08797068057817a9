#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmpc/generators.hpp"
#include "tmpc/planner.hpp"
#include "tmpc/records.hpp"
#include "tmpc/rewards.hpp"

namespace tmpc {

// Family spec from which per-seed environments are drawn.
struct SyntheticEnvSpec {
    std::size_t alphabet_size = 8;
    std::size_t episode_length = 8;
    double reuse_bias = 0.8;
    bool distinct_reference = true;
    std::string reward_shape = "per_segment"; // per_segment | delayed_suffix
    std::size_t suffix_len = 1;
};

SyntheticEnv make_env_from_spec(const SyntheticEnvSpec& spec, std::uint64_t seed);

struct GeneratorSpec {
    std::string kind = "synthetic"; // synthetic | http
    SyntheticEnvSpec synthetic;
    HttpBackendConfig http;
};

struct RewardSpec {
    std::string kind = "env_lexical"; // env_lexical | pass_rate | http
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    RewardHttpConfig http;
    SandboxConfig sandbox;
    std::chrono::milliseconds per_test_timeout{5000};
};

struct ExperimentConfig {
    TaskKind task_kind = TaskKind::synthetic;
    std::vector<std::string> methods = {"tmpc"}; // tmpc | best_of_n | naive_refine
    PlannerConfig planner;
    GeneratorSpec generator;
    RewardSpec reward;
    std::string dataset_path;     // unused by synthetic experiments
    std::string output_path = "tmpc-out";
    std::vector<std::uint64_t> repeat_seeds = {0};
    int best_of_n_budget = 10;
    int workers = 1;
    int prompt_limit = 0; // 0 = whole dataset
};

// Checks invariants: non-empty seeds/methods, referenced paths exist.
void validate_experiment_config(const ExperimentConfig& config);

struct PromptEntry {
    std::string prompt_id;
    PromptState prompt;
    TestSuite suite; // pass-rate tasks only
};

// Dataset loaders per task: MBPP-style JSON for program synthesis, one prompt
// per line for long-form, one source per line (optional tab-separated
// reference, ignored) for translation.
std::vector<PromptEntry> load_dataset(const ExperimentConfig& config);

struct ExperimentResult {
    std::string trace_path;
    std::string summary_path;
    int runs_completed = 0;
    int runs_aborted = 0;
};

// Runs every configured method over every prompt x seed, streaming RunRecords
// as line-delimited JSON and writing a CSV summary. Deterministic for
// synthetic backends: re-running an identical config produces byte-identical
// traces. With `resume`, (method, prompt, seed) triples already summarized in
// the existing trace are skipped.
ExperimentResult run_experiment(const ExperimentConfig& config, bool resume = false);

// Rebuilds the summary CSV from a trace file; the records are the source of
// truth.
std::string summarize_records(const std::vector<RunRecord>& records);
std::string run_report(const std::string& trace_path, const std::string& summary_path);

std::vector<RunRecord> read_trace(const std::string& trace_path);

struct OracleSweepSpec {
    SyntheticEnvSpec env;
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> horizons;
    std::vector<std::size_t> commits = {1};
};

// Optimum vs receding-horizon utility per (seed, horizon, commit); guard
// failures are recorded as rows and the sweep continues.
std::string oracle_sweep_csv(const OracleSweepSpec& spec);
std::string run_oracle_sweep(const OracleSweepSpec& spec, const std::string& csv_path);

} // namespace tmpc

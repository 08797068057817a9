// Command-line front end: single plans, batched experiments, oracle sweeps,
// and trace re-summarization.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "tmpc/errors.hpp"
#include "tmpc/harness.hpp"
#include "tmpc/json_io.hpp"
#include "tmpc/planner.hpp"
#include "tmpc/presets.hpp"
#include "tmpc/prompting.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw tmpc::ContractViolation("cannot open " + path);
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct ConfigCli {
    std::string preset;
    std::string config_path;
    std::vector<std::string> sets; // key=value JSON pointer overrides
};

// Precedence: built-in defaults < preset < config file < --set flags.
tmpc::ExperimentConfig resolve_config(const ConfigCli& cli) {
    json doc = json(tmpc::ExperimentConfig{});
    if (!cli.preset.empty()) {
        doc = tmpc::merge_config(std::move(doc), tmpc::load_preset(cli.preset).overlay);
    }
    if (!cli.config_path.empty()) {
        doc = tmpc::merge_config(std::move(doc), json::parse(read_file(cli.config_path)));
    }
    for (const std::string& assignment : cli.sets) {
        const std::size_t eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw tmpc::ContractViolation("--set expects /json/pointer=value: " + assignment);
        }
        const std::string pointer = assignment.substr(0, eq);
        const std::string value = assignment.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value; // bare strings allowed
        }
        doc[json::json_pointer(pointer)] = parsed;
    }
    return doc.get<tmpc::ExperimentConfig>();
}

void add_config_flags(CLI::App* cmd, ConfigCli& cli) {
    cmd->add_option("--preset", cli.preset, "Named configuration preset");
    cmd->add_option("--config", cli.config_path, "Experiment config JSON file");
    cmd->add_option("--set", cli.sets,
                    "Override a config value by JSON pointer, e.g. "
                    "--set /planner/iterations=5");
}

int cmd_plan(const ConfigCli& cli, const std::string& prompt_arg,
             const std::string& prompt_file, const std::string& trace_path) {
    tmpc::ExperimentConfig config = resolve_config(cli);

    tmpc::PromptState prompt;
    std::unique_ptr<tmpc::Generator> generator;
    std::shared_ptr<tmpc::Reward> reward;
    const std::uint64_t seed = config.repeat_seeds.empty() ? 0 : config.repeat_seeds.front();

    if (config.generator.kind == "synthetic") {
        const tmpc::SyntheticEnv env = tmpc::make_env_from_spec(config.generator.synthetic, seed);
        prompt = tmpc::PromptState{tmpc::env_prompt_text(env), tmpc::TaskKind::synthetic};
        generator = std::make_unique<tmpc::SyntheticGenerator>(env);
        reward = std::make_shared<tmpc::LexicalEnvReward>(env, prompt.prompt_text);
    } else {
        std::string text = prompt_arg;
        if (!prompt_file.empty()) {
            text = read_file(prompt_file);
        }
        prompt = tmpc::make_prompt_state(text, config.task_kind);
        generator = std::make_unique<tmpc::HttpChatGenerator>(config.generator.http);
        if (config.reward.kind == "http") {
            reward = std::make_shared<tmpc::HttpReward>(config.reward.http);
        } else {
            throw tmpc::ContractViolation("plan: reward kind " + config.reward.kind +
                                          " needs the experiment subcommand");
        }
    }
    if (config.reward.noise_sigma > 0.0) {
        reward = tmpc::with_noise(std::move(reward), config.reward.noise_sigma,
                                  config.reward.noise_seed);
    }

    tmpc::PlannerConfig planner_config = config.planner;
    planner_config.seed = seed;
    if (planner_config.system_prompt_portfolio.empty()) {
        planner_config.system_prompt_portfolio = tmpc::synthetic_portfolio();
    }

    std::ofstream trace;
    tmpc::RecordSink sink;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::trunc);
        if (!trace) {
            throw tmpc::ContractViolation("cannot write " + trace_path);
        }
        sink = [&](const tmpc::RunRecord& raw) {
            tmpc::RunRecord record = raw;
            record.run_id = "plan-s" + std::to_string(seed);
            record.prompt_id = "cli";
            record.method = "tmpc";
            trace << tmpc::to_json_line(record) << "\n";
        };
    }

    const tmpc::PlanResult result = tmpc::plan(prompt, *generator, *reward, planner_config, sink);

    std::cout << "generations: " << result.generation_count << "\n";
    std::cout << "best score:  " << result.best.total_score.value_or(0.0) << "\n";
    std::cout << "best by iteration:";
    for (double value : result.best_by_iteration) {
        std::cout << " " << value;
    }
    std::cout << "\n--- best response ---\n" << tmpc::trajectory_text(result.best) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Subgoal-buffered test-time planning over text trajectories"};
    app.require_subcommand(1);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Run one planning loop on a single prompt");
    ConfigCli plan_cli;
    std::string prompt_arg;
    std::string prompt_file;
    std::string plan_trace;
    add_config_flags(plan_cmd, plan_cli);
    plan_cmd->add_option("--prompt", prompt_arg, "Prompt text");
    plan_cmd->add_option("--prompt-file", prompt_file, "File containing the prompt");
    plan_cmd->add_option("--trace", plan_trace, "Write rollout records to this JSONL file");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Run a batched experiment");
    ConfigCli exp_cli;
    bool resume = false;
    add_config_flags(exp_cmd, exp_cli);
    exp_cmd->add_flag("--resume", resume, "Skip prompt x seed pairs already in the trace");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force vs receding-horizon sweeps");
    tmpc::OracleSweepSpec sweep;
    sweep.env.distinct_reference = false; // oracle families draw references iid
    std::size_t oracle_seed_count = 100;
    std::uint64_t oracle_seed_base = 0;
    std::string oracle_out = "oracle_sweep.csv";
    std::string oracle_shape = "per_segment";
    oracle_cmd->add_option("--alphabet", sweep.env.alphabet_size, "Alphabet size")
        ->default_val(3);
    oracle_cmd->add_option("--length", sweep.env.episode_length, "Episode length")
        ->default_val(6);
    oracle_cmd->add_option("--seeds", oracle_seed_count, "Number of sampled environments")
        ->default_val(100);
    oracle_cmd->add_option("--seed-base", oracle_seed_base, "First environment seed");
    oracle_cmd->add_option("--horizons", sweep.horizons, "Horizons to sweep")
        ->delimiter(',')
        ->default_str("1,2,3,4");
    oracle_cmd->add_option("--commits", sweep.commits, "Actions committed per step")
        ->delimiter(',');
    oracle_cmd->add_option("--reward-shape", oracle_shape, "per_segment | delayed_suffix");
    oracle_cmd->add_option("--suffix-len", sweep.env.suffix_len,
                           "Suffix length for delayed_suffix");
    oracle_cmd->add_option("--out", oracle_out, "Output CSV path");

    // report
    auto* report_cmd = app.add_subcommand("report", "Re-summarize a trace file");
    std::string report_trace;
    std::string report_out = "summary.csv";
    report_cmd->add_option("--trace", report_trace, "Input JSONL trace")->required();
    report_cmd->add_option("--out", report_out, "Output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) {
            return cmd_plan(plan_cli, prompt_arg, prompt_file, plan_trace);
        }
        if (exp_cmd->parsed()) {
            const tmpc::ExperimentConfig config = resolve_config(exp_cli);
            const tmpc::ExperimentResult result = tmpc::run_experiment(config, resume);
            std::cout << "trace:   " << result.trace_path << "\n";
            std::cout << "summary: " << result.summary_path << "\n";
            std::cout << "runs:    " << result.runs_completed << " completed, "
                      << result.runs_aborted << " aborted\n";
            return result.runs_aborted == 0 ? 0 : 1;
        }
        if (oracle_cmd->parsed()) {
            sweep.env.reward_shape = oracle_shape;
            if (sweep.horizons.empty()) {
                sweep.horizons = {1, 2, 3, 4};
            }
            if (sweep.commits.empty()) {
                sweep.commits = {1};
            }
            for (std::size_t i = 0; i < oracle_seed_count; ++i) {
                sweep.seeds.push_back(oracle_seed_base + i);
            }
            std::cout << tmpc::run_oracle_sweep(sweep, oracle_out) << "\n";
            return 0;
        }
        if (report_cmd->parsed()) {
            std::cout << tmpc::run_report(report_trace, report_out) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

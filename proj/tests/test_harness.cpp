#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tmpc/errors.hpp"
#include "tmpc/harness.hpp"
#include "tmpc/json_io.hpp"
#include "tmpc/presets.hpp"

using namespace tmpc;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("tmpc_harness_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig small_synthetic_config(const std::string& out_dir) {
    ExperimentConfig config = config_from_preset(load_preset("synthetic-default"));
    config.methods = {"tmpc", "best_of_n", "naive_refine"};
    config.planner.iterations = 2;
    config.planner.rollouts = 2;
    config.best_of_n_budget = 5;
    config.repeat_seeds = {1, 2, 3};
    config.output_path = out_dir;
    return config;
}

// Just enough JSON Schema (draft-07) to enforce the published record schema:
// type, required, properties, additionalProperties, items, enum, minimum,
// pattern.
bool validates(const json& schema, const json& value, std::string& why);

bool check_type(const std::string& type, const json& value) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "boolean") return value.is_boolean();
    return false;
}

bool validates(const json& schema, const json& value, std::string& why) {
    if (schema.contains("type") && !check_type(schema["type"].get<std::string>(), value)) {
        why = "type mismatch, expected " + schema["type"].get<std::string>();
        return false;
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& allowed : schema["enum"]) {
            found = found || allowed == value;
        }
        if (!found) {
            why = "value not in enum: " + value.dump();
            return false;
        }
    }
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema["minimum"].get<double>()) {
        why = "below minimum";
        return false;
    }
    if (schema.contains("pattern") && value.is_string() &&
        !std::regex_match(value.get<std::string>(), std::regex(schema["pattern"].get<std::string>()))) {
        why = "pattern mismatch: " + value.dump();
        return false;
    }
    if (value.is_object()) {
        if (schema.contains("required")) {
            for (const auto& key : schema["required"]) {
                if (!value.contains(key.get<std::string>())) {
                    why = "missing required key " + key.get<std::string>();
                    return false;
                }
            }
        }
        const json props = schema.value("properties", json::object());
        for (const auto& [key, member] : value.items()) {
            if (props.contains(key)) {
                if (!validates(props[key], member, why)) {
                    why = key + ": " + why;
                    return false;
                }
            } else if (schema.value("additionalProperties", json(true)) == json(false)) {
                why = "unexpected key " + key;
                return false;
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        for (const auto& item : value) {
            if (!validates(schema["items"], item, why)) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

TEST_CASE("a synthetic experiment writes traces and a per-method summary") {
    const fs::path dir = fresh_dir("basic");
    const ExperimentConfig config = small_synthetic_config(dir.string());
    const ExperimentResult result = run_experiment(config);
    CHECK(result.runs_aborted == 0);
    CHECK(result.runs_completed == 9); // 3 methods x 1 prompt x 3 seeds

    const std::string summary = read_file(result.summary_path);
    CHECK(summary.find("tmpc,3,") != std::string::npos);
    CHECK(summary.find("best_of_n,3,") != std::string::npos);
    CHECK(summary.find("naive_refine,3,") != std::string::npos);
    // tmpc curves span the initial rollout plus both iterations.
    CHECK(summary.find("iter_2_mean") != std::string::npos);

    const std::vector<RunRecord> records = read_trace(result.trace_path);
    int rollouts = 0;
    int summaries = 0;
    for (const RunRecord& record : records) {
        rollouts += record.event == "rollout" ? 1 : 0;
        summaries += record.event == "summary" ? 1 : 0;
    }
    CHECK(summaries == 9);
    // tmpc and naive_refine: 5 rollouts each; best_of_n: 5. Three seeds each.
    CHECK(rollouts == 45);
    fs::remove_all(dir);
}

TEST_CASE("identical configs replay byte-identical traces") {
    const fs::path dir_a = fresh_dir("replay_a");
    const fs::path dir_b = fresh_dir("replay_b");
    ExperimentConfig config = small_synthetic_config(dir_a.string());
    const ExperimentResult first = run_experiment(config);
    config.output_path = dir_b.string();
    const ExperimentResult second = run_experiment(config);
    CHECK(read_file(first.trace_path) == read_file(second.trace_path));
    CHECK(read_file(first.summary_path) == read_file(second.summary_path));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("worker pools do not change the trace bytes") {
    const fs::path dir_a = fresh_dir("workers1");
    const fs::path dir_b = fresh_dir("workers2");
    ExperimentConfig config = small_synthetic_config(dir_a.string());
    const ExperimentResult serial = run_experiment(config);
    config.output_path = dir_b.string();
    config.workers = 3;
    const ExperimentResult pooled = run_experiment(config);
    CHECK(read_file(serial.trace_path) == read_file(pooled.trace_path));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("resume completes only the missing prompt x seed pairs") {
    const fs::path dir = fresh_dir("resume");
    ExperimentConfig config = small_synthetic_config(dir.string());
    config.methods = {"tmpc"};
    config.repeat_seeds = {1, 2};
    run_experiment(config);

    config.repeat_seeds = {1, 2, 3, 4};
    const ExperimentResult resumed = run_experiment(config, /*resume=*/true);
    CHECK(resumed.runs_completed == 2); // only seeds 3 and 4

    const std::vector<RunRecord> records = read_trace(resumed.trace_path);
    std::set<std::string> summary_runs;
    for (const RunRecord& record : records) {
        if (record.event == "summary") {
            CHECK(summary_runs.insert(record.run_id).second); // no duplicates
        }
    }
    CHECK(summary_runs.size() == 4);
    fs::remove_all(dir);
}

TEST_CASE("every emitted record validates against the published schema") {
    const json schema = json::parse(
        read_file((fs::path(TMPC_SOURCE_DIR) / "docs" / "run_record.schema.json").string()));
    const fs::path dir = fresh_dir("schema");
    const ExperimentConfig config = small_synthetic_config(dir.string());
    const ExperimentResult result = run_experiment(config);

    std::ifstream in(result.trace_path);
    std::string line;
    int checked = 0;
    while (std::getline(in, line)) {
        const json record = json::parse(line);
        std::string why;
        const bool ok = validates(schema, record, why);
        CAPTURE(why);
        CAPTURE(line);
        CHECK(ok);
        ++checked;
    }
    CHECK(checked > 0);
    fs::remove_all(dir);
}

TEST_CASE("report reproduces the summary from the trace alone") {
    const fs::path dir = fresh_dir("report");
    const ExperimentConfig config = small_synthetic_config(dir.string());
    const ExperimentResult result = run_experiment(config);

    const std::string rebuilt_path = (dir / "rebuilt.csv").string();
    run_report(result.trace_path, rebuilt_path);
    CHECK(read_file(rebuilt_path) == read_file(result.summary_path));
    fs::remove_all(dir);
}

TEST_CASE("experiment config invariants are enforced") {
    ExperimentConfig config = config_from_preset(load_preset("synthetic-default"));
    config.repeat_seeds.clear();
    CHECK_THROWS_AS(validate_experiment_config(config), ContractViolation);

    config = config_from_preset(load_preset("longform-default"));
    config.dataset_path = "/definitely/not/a/real/path.txt";
    CHECK_THROWS_AS(validate_experiment_config(config), ContractViolation);

    config = config_from_preset(load_preset("synthetic-default"));
    config.methods = {"unknown"};
    CHECK_THROWS_AS(validate_experiment_config(config), ContractViolation);
}

TEST_CASE("line datasets load with ids, tabs split off references") {
    const fs::path dir = fresh_dir("dataset");
    const fs::path file = dir / "prompts.txt";
    {
        std::ofstream out(file);
        out << "First question?\n";
        out << "Second source\tignored reference\n";
        out << "\n";
        out << "Third.\n";
    }
    ExperimentConfig config;
    config.task_kind = TaskKind::long_form;
    config.dataset_path = file.string();
    const auto entries = load_dataset(config);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].prompt_id == "p0");
    CHECK(entries[1].prompt.prompt_text == "Second source");
    CHECK(entries[2].prompt.prompt_text == "Third.");

    config.prompt_limit = 2;
    CHECK(load_dataset(config).size() == 2);
    fs::remove_all(dir);
}

TEST_CASE("oracle sweep: full horizon equals brute force, guards are recorded") {
    OracleSweepSpec spec;
    spec.env.alphabet_size = 3;
    spec.env.episode_length = 4;
    spec.env.distinct_reference = false;
    spec.seeds = {1, 2, 3};
    spec.horizons = {1, 4};
    spec.commits = {1};
    const std::string csv = oracle_sweep_csv(spec);

    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "env_seed,horizon,commit,optimum,receding,status");
    int full_horizon_rows = 0;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string seed, horizon, commit, optimum, receding, status;
        std::getline(fields, seed, ',');
        std::getline(fields, horizon, ',');
        std::getline(fields, commit, ',');
        std::getline(fields, optimum, ',');
        std::getline(fields, receding, ',');
        std::getline(fields, status, ',');
        CHECK(status == "ok");
        if (horizon == "4") {
            CHECK(optimum == receding);
            ++full_horizon_rows;
        }
    }
    CHECK(full_horizon_rows == 3);

    // An intractable family records guard rows and keeps sweeping.
    OracleSweepSpec big;
    big.env.alphabet_size = 4;
    big.env.episode_length = 12; // 4^12 blows the guard
    big.env.distinct_reference = false;
    big.seeds = {1};
    big.horizons = {1};
    const std::string guarded = oracle_sweep_csv(big);
    CHECK(guarded.find("guard_error") != std::string::npos);
}

TEST_CASE("aborted runs are counted and recorded") {
    const fs::path dir = fresh_dir("abort");
    ExperimentConfig config;
    config.task_kind = TaskKind::long_form;
    config.methods = {"tmpc"};
    config.repeat_seeds = {1};
    config.output_path = dir.string();
    config.generator.kind = "http";
    config.generator.http.endpoint = "http://127.0.0.1:9/unreachable";
    config.generator.http.timeout = std::chrono::milliseconds(100);
    config.generator.http.retry_backoff = std::chrono::milliseconds(5);
    config.reward.kind = "http";
    config.reward.http.endpoint = "http://127.0.0.1:9/unreachable";

    const fs::path prompts = dir / "prompts.txt";
    {
        std::ofstream out(prompts);
        out << "One prompt.\n";
    }
    config.dataset_path = prompts.string();

    const ExperimentResult result = run_experiment(config);
    CHECK(result.runs_aborted == 1);
    CHECK(result.runs_completed == 0);
    const std::vector<RunRecord> records = read_trace(result.trace_path);
    REQUIRE(records.size() == 1);
    CHECK(records[0].event == "aborted");
    fs::remove_all(dir);
}

TEST_CASE("program-synthesis datasets map problems, tests, and suites") {
    const fs::path dir = fresh_dir("mbpp");
    const fs::path file = dir / "tasks.json";
    {
        std::ofstream out(file);
        out << R"([{"task_id": 42, "text": "Double a number.",
                    "code": "def dbl(x):\n    return 2 * x",
                    "test_list": ["assert dbl(2) == 4", "assert dbl(0) == 0"],
                    "test_setup_code": ""}])";
    }
    ExperimentConfig config;
    config.task_kind = TaskKind::program_synthesis;
    config.dataset_path = file.string();
    const auto entries = load_dataset(config);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].prompt_id == "task42");
    CHECK(entries[0].prompt.prompt_text == "Double a number.");
    CHECK(entries[0].prompt.public_tests == "assert dbl(2) == 4\nassert dbl(0) == 0");
    CHECK(entries[0].suite.cases.size() == 2);
    CHECK(entries[0].suite.entry_point == "dbl");
    fs::remove_all(dir);
}

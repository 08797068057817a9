#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tmpc/errors.hpp"
#include "tmpc/json_io.hpp"
#include "tmpc/presets.hpp"
#include "tmpc/prompting.hpp"

using namespace tmpc;
using nlohmann::json;

namespace {

json file_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    json doc;
    in >> doc;
    return doc;
}

} // namespace

TEST_CASE("longform-default carries the documented parameters") {
    const ExperimentConfig config = config_from_preset(load_preset("longform-default"));
    CHECK(config.task_kind == TaskKind::long_form);
    CHECK(config.planner.iterations == 3);
    CHECK(config.planner.rollouts == 3);
    CHECK(config.planner.alpha == 4.0);
    CHECK(config.planner.buffer_capacity == 3);
    CHECK(config.planner.segmenter.mode == SegmentMode::chunk);
    CHECK(config.planner.segmenter.chunk_size == 3);
    CHECK(config.planner.system_prompt_portfolio == longform_portfolio());
}

TEST_CASE("mt-default carries the documented parameters") {
    const ExperimentConfig config = config_from_preset(load_preset("mt-default"));
    CHECK(config.task_kind == TaskKind::translation); // adaptive sampling keys off the task
    CHECK(config.planner.iterations == 3);
    CHECK(config.planner.rollouts == 3);
    CHECK(config.planner.alpha == 1.0);
    CHECK(config.planner.segmenter.mode == SegmentMode::chunk);
    CHECK(config.planner.segmenter.chunk_size == 3);
    CHECK(config.planner.system_prompt_portfolio == translation_portfolio());
}

TEST_CASE("code-default carries the documented parameters") {
    const ExperimentConfig config = config_from_preset(load_preset("code-default"));
    CHECK(config.task_kind == TaskKind::program_synthesis);
    CHECK(config.planner.iterations == 5);
    CHECK(config.planner.rollouts == 2);
    CHECK(config.planner.alpha == 0.0); // promising means pass rate strictly above zero
    CHECK(config.planner.segmenter.mode == SegmentMode::milestone);
    CHECK(config.reward.kind == "pass_rate");
    CHECK(config.planner.system_prompt_portfolio == code_portfolio());
}

TEST_CASE("robustness presets mirror the sensitivity-study rows") {
    const ExperimentConfig buf6 = config_from_preset(load_preset("longform-buf6"));
    CHECK(buf6.planner.buffer_capacity == 6);
    CHECK(buf6.planner.segmenter.chunk_size == 3);

    const ExperimentConfig seg6 = config_from_preset(load_preset("longform-seg6"));
    CHECK(seg6.planner.buffer_capacity == 3);
    CHECK(seg6.planner.segmenter.chunk_size == 6);

    const ExperimentConfig noisy = config_from_preset(load_preset("rm-noise-sigma1"));
    CHECK(noisy.reward.noise_sigma == 1.0);

    const ExperimentConfig naive = config_from_preset(load_preset("naive-refine"));
    CHECK(naive.methods == std::vector<std::string>{"naive_refine"});
    CHECK(naive.planner.buffer_capacity == 1);
}

TEST_CASE("synthetic-default is runnable out of the box") {
    const ExperimentConfig config = config_from_preset(load_preset("synthetic-default"));
    CHECK(config.task_kind == TaskKind::synthetic);
    CHECK(config.generator.kind == "synthetic");
    CHECK(config.generator.synthetic.reuse_bias >= 0.5);
    CHECK(config.reward.kind == "env_lexical");
    validate_experiment_config(config);
}

TEST_CASE("every preset round-trips through config serialization unchanged") {
    for (const std::string& name : preset_names()) {
        CAPTURE(name);
        const ExperimentConfig config = config_from_preset(load_preset(name));
        const json once = json(config);
        const ExperimentConfig reparsed = once.get<ExperimentConfig>();
        const json twice = json(reparsed);
        CHECK(once == twice);
    }
}

TEST_CASE("unknown presets list what exists") {
    try {
        load_preset("not-a-preset");
        FAIL("expected ContractViolation");
    } catch (const ContractViolation& e) {
        const std::string message = e.what();
        for (const std::string& name : preset_names()) {
            CHECK(message.find(name) != std::string::npos);
        }
    }
}

TEST_CASE("shipped preset files match the built-in table") {
    const std::filesystem::path dir = std::filesystem::path(TMPC_SOURCE_DIR) / "presets";
    REQUIRE(std::filesystem::exists(dir));
    for (const std::string& name : preset_names()) {
        CAPTURE(name);
        const json from_file = file_json(dir / (name + ".json"));
        CHECK(from_file == load_preset(name).overlay);
    }
}

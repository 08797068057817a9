#include "tmpc/presets.hpp"

#include <map>

#include "tmpc/errors.hpp"
#include "tmpc/json_io.hpp"
#include "tmpc/prompting.hpp"

namespace tmpc {
namespace {

using nlohmann::json;

json longform_base() {
    return json{
        {"task_kind", "long_form"},
        {"planner",
         json{{"iterations", 3},
              {"rollouts", 3},
              {"alpha", 4.0},
              {"buffer_capacity", 3},
              {"segmenter", json{{"mode", "chunk"}, {"chunk_size", 3}}},
              {"system_prompt_portfolio", longform_portfolio()}}},
        {"generator", json{{"kind", "http"}}},
        {"reward", json{{"kind", "http"}}},
    };
}

const std::map<std::string, json>& preset_table() {
    static const std::map<std::string, json> table = [] {
        std::map<std::string, json> t;

        t["longform-default"] = longform_base();

        t["longform-buf6"] = merge_config(
            longform_base(), json{{"planner", json{{"buffer_capacity", 6}}}});

        t["longform-seg6"] = merge_config(
            longform_base(),
            json{{"planner", json{{"segmenter", json{{"mode", "chunk"}, {"chunk_size", 6}}}}}});

        t["rm-noise-sigma1"] = merge_config(
            longform_base(), json{{"reward", json{{"noise_sigma", 1.0}}}});

        t["naive-refine"] = merge_config(
            longform_base(), json{{"methods", json::array({"naive_refine"})},
                                  {"planner", json{{"buffer_capacity", 1}}}});

        t["mt-default"] = json{
            {"task_kind", "translation"},
            {"planner",
             json{{"iterations", 3},
                  {"rollouts", 3},
                  {"alpha", 1.0},
                  // The adaptive subgoal sample (iteration + 5 draws) needs
                  // room to grow across three iterations.
                  {"buffer_capacity", 32},
                  {"segmenter", json{{"mode", "chunk"}, {"chunk_size", 3}}},
                  {"system_prompt_portfolio", translation_portfolio()}}},
            {"generator", json{{"kind", "http"}}},
            {"reward", json{{"kind", "http"}}},
        };

        t["code-default"] = json{
            {"task_kind", "program_synthesis"},
            {"planner",
             json{{"iterations", 5},
                  {"rollouts", 2},
                  // Promising means any pass rate strictly above zero.
                  {"alpha", 0.0},
                  {"buffer_capacity", 3},
                  {"segmenter", json{{"mode", "milestone"}, {"chunk_size", 1}}},
                  {"system_prompt_portfolio", code_portfolio()}}},
            {"generator", json{{"kind", "http"}}},
            {"reward", json{{"kind", "pass_rate"}}},
        };

        t["synthetic-default"] = json{
            {"task_kind", "synthetic"},
            {"planner",
             json{{"iterations", 3},
                  {"rollouts", 3},
                  {"alpha", 0.5},
                  {"buffer_capacity", 16},
                  {"segmenter", json{{"mode", "sentence"}, {"chunk_size", 1}}},
                  {"system_prompt_portfolio", synthetic_portfolio()}}},
            {"generator",
             json{{"kind", "synthetic"},
                  {"synthetic", json{{"alphabet_size", 8},
                                     {"episode_length", 8},
                                     {"reuse_bias", 0.8},
                                     {"distinct_reference", true}}}}},
            {"reward", json{{"kind", "env_lexical"}}},
        };

        return t;
    }();
    return table;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, _] : preset_table()) {
        names.push_back(name);
    }
    return names;
}

Preset load_preset(const std::string& name) {
    const auto& table = preset_table();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::string message = "unknown preset '" + name + "'; available:";
        for (const auto& [known, _] : table) {
            message += " " + known;
        }
        throw ContractViolation(message);
    }
    return Preset{name, it->second};
}

ExperimentConfig config_from_preset(const Preset& preset) {
    json base = json(ExperimentConfig{});
    base = merge_config(std::move(base), preset.overlay);
    return base.get<ExperimentConfig>();
}

} // namespace tmpc

#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "tmpc/harness.hpp"

namespace tmpc {

// A named ExperimentConfig overlay reproducing a documented parameterization.
struct Preset {
    std::string name;
    nlohmann::json overlay;
};

std::vector<std::string> preset_names();

// Throws ContractViolation listing the available presets on unknown names.
Preset load_preset(const std::string& name);

// Default config with the preset overlay merged in.
ExperimentConfig config_from_preset(const Preset& preset);

} // namespace tmpc

#pragma once

#include <nlohmann/json.hpp>

#include "tmpc/harness.hpp"
#include "tmpc/planner.hpp"

// JSON bindings for the configuration surface. Field names match the struct
// members; durations serialize as integral milliseconds.

namespace tmpc {

void to_json(nlohmann::json& j, const SegmenterSpec& s);
void from_json(const nlohmann::json& j, SegmenterSpec& s);

void to_json(nlohmann::json& j, const AggregationConfig& c);
void from_json(const nlohmann::json& j, AggregationConfig& c);

void to_json(nlohmann::json& j, const SamplingParams& p);
void from_json(const nlohmann::json& j, SamplingParams& p);

void to_json(nlohmann::json& j, const PlannerConfig& c);
void from_json(const nlohmann::json& j, PlannerConfig& c);

void to_json(nlohmann::json& j, const SyntheticEnvSpec& s);
void from_json(const nlohmann::json& j, SyntheticEnvSpec& s);

void to_json(nlohmann::json& j, const GeneratorSpec& s);
void from_json(const nlohmann::json& j, GeneratorSpec& s);

void to_json(nlohmann::json& j, const RewardSpec& s);
void from_json(const nlohmann::json& j, RewardSpec& s);

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// Recursive object merge: overlay keys replace base keys, nested objects
// merge key by key.
nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& overlay);

} // namespace tmpc

#include "tmpc/json_io.hpp"

#include "tmpc/errors.hpp"

namespace tmpc {

using nlohmann::json;

void to_json(json& j, const SegmenterSpec& s) {
    j = json{{"mode", to_string(s.mode)}, {"chunk_size", s.chunk_size}};
}

void from_json(const json& j, SegmenterSpec& s) {
    s.mode = segment_mode_from_string(j.value("mode", std::string(to_string(s.mode))));
    s.chunk_size = j.value("chunk_size", s.chunk_size);
}

void to_json(json& j, const AggregationConfig& c) {
    j = json{{"lambda", c.lambda}, {"alpha", c.alpha}};
}

void from_json(const json& j, AggregationConfig& c) {
    c.lambda = j.value("lambda", c.lambda);
    c.alpha = j.value("alpha", c.alpha);
}

void to_json(json& j, const SamplingParams& p) {
    j = json{{"temperature", p.temperature}, {"max_output_units", p.max_output_units}};
}

void from_json(const json& j, SamplingParams& p) {
    p.temperature = j.value("temperature", p.temperature);
    p.max_output_units = j.value("max_output_units", p.max_output_units);
}

void to_json(json& j, const PlannerConfig& c) {
    j = json{{"iterations", c.iterations},
             {"rollouts", c.rollouts},
             {"alpha", c.alpha},
             {"buffer_capacity", c.buffer_capacity},
             {"segmenter", c.segmenter},
             {"aggregation", c.aggregation},
             {"seed", c.seed},
             {"system_prompt_portfolio", c.system_prompt_portfolio},
             {"literal_eviction", c.literal_eviction},
             {"segment_context",
              c.segment_context == SegmentContext::prefix ? "prefix" : "segment_alone"},
             {"sampling", c.sampling},
             {"max_parallel_rollouts", c.max_parallel_rollouts}};
}

void from_json(const json& j, PlannerConfig& c) {
    c.iterations = j.value("iterations", c.iterations);
    c.rollouts = j.value("rollouts", c.rollouts);
    c.alpha = j.value("alpha", c.alpha);
    c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
    if (j.contains("segmenter")) {
        j.at("segmenter").get_to(c.segmenter);
    }
    if (j.contains("aggregation")) {
        j.at("aggregation").get_to(c.aggregation);
    }
    c.seed = j.value("seed", c.seed);
    c.system_prompt_portfolio = j.value("system_prompt_portfolio", c.system_prompt_portfolio);
    c.literal_eviction = j.value("literal_eviction", c.literal_eviction);
    const std::string context = j.value(
        "segment_context",
        std::string(c.segment_context == SegmentContext::prefix ? "prefix" : "segment_alone"));
    if (context == "prefix") {
        c.segment_context = SegmentContext::prefix;
    } else if (context == "segment_alone") {
        c.segment_context = SegmentContext::segment_alone;
    } else {
        throw ContractViolation("config: unknown segment_context " + context);
    }
    if (j.contains("sampling")) {
        j.at("sampling").get_to(c.sampling);
    }
    c.max_parallel_rollouts = j.value("max_parallel_rollouts", c.max_parallel_rollouts);
}

void to_json(json& j, const SyntheticEnvSpec& s) {
    j = json{{"alphabet_size", s.alphabet_size},
             {"episode_length", s.episode_length},
             {"reuse_bias", s.reuse_bias},
             {"distinct_reference", s.distinct_reference},
             {"reward_shape", s.reward_shape},
             {"suffix_len", s.suffix_len}};
}

void from_json(const json& j, SyntheticEnvSpec& s) {
    s.alphabet_size = j.value("alphabet_size", s.alphabet_size);
    s.episode_length = j.value("episode_length", s.episode_length);
    s.reuse_bias = j.value("reuse_bias", s.reuse_bias);
    s.distinct_reference = j.value("distinct_reference", s.distinct_reference);
    s.reward_shape = j.value("reward_shape", s.reward_shape);
    s.suffix_len = j.value("suffix_len", s.suffix_len);
}

void to_json(json& j, const GeneratorSpec& s) {
    j = json{{"kind", s.kind},
             {"synthetic", s.synthetic},
             {"http",
              json{{"endpoint", s.http.endpoint},
                   {"model_name", s.http.model_name},
                   {"api_key_env", s.http.api_key_env},
                   {"timeout_ms", s.http.timeout.count()},
                   {"retry_backoff_ms", s.http.retry_backoff.count()},
                   {"max_in_flight", s.http.max_in_flight}}}};
}

void from_json(const json& j, GeneratorSpec& s) {
    s.kind = j.value("kind", s.kind);
    if (j.contains("synthetic")) {
        j.at("synthetic").get_to(s.synthetic);
    }
    if (j.contains("http")) {
        const json& h = j.at("http");
        s.http.endpoint = h.value("endpoint", s.http.endpoint);
        s.http.model_name = h.value("model_name", s.http.model_name);
        s.http.api_key_env = h.value("api_key_env", s.http.api_key_env);
        s.http.timeout = std::chrono::milliseconds(h.value("timeout_ms", s.http.timeout.count()));
        s.http.retry_backoff =
            std::chrono::milliseconds(h.value("retry_backoff_ms", s.http.retry_backoff.count()));
        s.http.max_in_flight = h.value("max_in_flight", s.http.max_in_flight);
    }
}

void to_json(json& j, const RewardSpec& s) {
    j = json{{"kind", s.kind},
             {"noise_sigma", s.noise_sigma},
             {"noise_seed", s.noise_seed},
             {"http",
              json{{"endpoint", s.http.endpoint},
                   {"api_key_env", s.http.api_key_env},
                   {"timeout_ms", s.http.timeout.count()},
                   {"retry_backoff_ms", s.http.retry_backoff.count()}}},
             {"sandbox",
              json{{"memory_limit_bytes", s.sandbox.memory_limit_bytes},
                   {"max_concurrent", s.sandbox.max_concurrent},
                   {"python_executable", s.sandbox.python_executable},
                   {"env_allowlist", s.sandbox.env_allowlist}}},
             {"per_test_timeout_ms", s.per_test_timeout.count()}};
}

void from_json(const json& j, RewardSpec& s) {
    s.kind = j.value("kind", s.kind);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.noise_seed = j.value("noise_seed", s.noise_seed);
    if (j.contains("http")) {
        const json& h = j.at("http");
        s.http.endpoint = h.value("endpoint", s.http.endpoint);
        s.http.api_key_env = h.value("api_key_env", s.http.api_key_env);
        s.http.timeout = std::chrono::milliseconds(h.value("timeout_ms", s.http.timeout.count()));
        s.http.retry_backoff =
            std::chrono::milliseconds(h.value("retry_backoff_ms", s.http.retry_backoff.count()));
    }
    if (j.contains("sandbox")) {
        const json& b = j.at("sandbox");
        s.sandbox.memory_limit_bytes = b.value("memory_limit_bytes", s.sandbox.memory_limit_bytes);
        s.sandbox.max_concurrent = b.value("max_concurrent", s.sandbox.max_concurrent);
        s.sandbox.python_executable = b.value("python_executable", s.sandbox.python_executable);
        s.sandbox.env_allowlist = b.value("env_allowlist", s.sandbox.env_allowlist);
    }
    s.per_test_timeout =
        std::chrono::milliseconds(j.value("per_test_timeout_ms", s.per_test_timeout.count()));
}

void to_json(json& j, const ExperimentConfig& c) {
    j = json{{"task_kind", to_string(c.task_kind)},
             {"methods", c.methods},
             {"planner", c.planner},
             {"generator", c.generator},
             {"reward", c.reward},
             {"dataset_path", c.dataset_path},
             {"output_path", c.output_path},
             {"repeat_seeds", c.repeat_seeds},
             {"best_of_n_budget", c.best_of_n_budget},
             {"workers", c.workers},
             {"prompt_limit", c.prompt_limit}};
}

void from_json(const json& j, ExperimentConfig& c) {
    c.task_kind = task_kind_from_string(j.value("task_kind", std::string(to_string(c.task_kind))));
    c.methods = j.value("methods", c.methods);
    if (j.contains("planner")) {
        j.at("planner").get_to(c.planner);
    }
    if (j.contains("generator")) {
        j.at("generator").get_to(c.generator);
    }
    if (j.contains("reward")) {
        j.at("reward").get_to(c.reward);
    }
    c.dataset_path = j.value("dataset_path", c.dataset_path);
    c.output_path = j.value("output_path", c.output_path);
    c.repeat_seeds = j.value("repeat_seeds", c.repeat_seeds);
    c.best_of_n_budget = j.value("best_of_n_budget", c.best_of_n_budget);
    c.workers = j.value("workers", c.workers);
    c.prompt_limit = j.value("prompt_limit", c.prompt_limit);
}

json merge_config(json base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        return overlay;
    }
    for (const auto& [key, value] : overlay.items()) {
        if (base.contains(key)) {
            base[key] = merge_config(base[key], value);
        } else {
            base[key] = value;
        }
    }
    return base;
}

} // namespace tmpc

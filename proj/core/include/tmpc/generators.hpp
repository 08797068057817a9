#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmpc/mdp.hpp"
#include "tmpc/subgoal.hpp"

namespace tmpc {

struct SamplingParams {
    double temperature = 0.7;
    int max_output_units = 1024; // token budget for HTTP backends
};

// Backend-agnostic request for one rollout. Subgoal conditioning travels
// inside the rendered prompts, not as a side channel.
struct GeneratorRequest {
    std::string system_prompt;
    std::string user_prompt;
    SamplingParams sampling;
    std::optional<std::uint64_t> seed;
};

// Rollout source. Implementations must be safely callable from multiple
// concurrent workers.
class Generator {
public:
    virtual ~Generator() = default;

    // Returns a non-empty completion. Throws BackendError (or a subclass) on
    // failure; the synthetic backend never fails and is deterministic given
    // (request.seed, env.seed).
    virtual std::string generate(const GeneratorRequest& request) = 0;
};

enum class RewardShape {
    per_segment,    // each position scores its own lexical match
    delayed_suffix, // reward only at the last step, for trailing reference matches
};

// Desk-scale verification environment: a hidden reference sequence over a
// small segment alphabet, a per-position proposal distribution, and a mixture
// knob that models subgoal conditioning (with probability reuse_bias a
// position is drawn from the conditioned subgoals at that index instead of
// the base distribution).
struct SyntheticEnv {
    std::vector<std::string> alphabet;
    std::size_t episode_length = 0;
    std::vector<std::string> hidden_reference; // one alphabet word per position
    double reuse_bias = 0.0;
    std::vector<std::vector<double>> base_distribution; // [position][alphabet word]
    std::uint64_t seed = 0;
    RewardShape reward_shape = RewardShape::per_segment;
    std::size_t suffix_len = 1; // for delayed_suffix
};

// Validates the env invariants (reference length, membership, normalized
// positive weights). Throws ContractViolation on violation.
void validate_env(const SyntheticEnv& env);

// Random environment with the given shape. `distinct_reference` draws the
// hidden reference without replacement (requires alphabet_size >= length).
SyntheticEnv make_random_env(std::uint64_t seed, std::size_t alphabet_size,
                             std::size_t episode_length, double reuse_bias,
                             RewardShape shape = RewardShape::per_segment,
                             std::size_t suffix_len = 1, bool distinct_reference = false);

// Reward of taking alphabet[actions[t]] at step t, given the earlier actions.
// This is the oracle-facing view used by exhaustive search.
double env_step_reward(const SyntheticEnv& env, const std::vector<std::size_t>& actions,
                       std::size_t t);

// Total trajectory reward of an action-index sequence.
double env_sequence_utility(const SyntheticEnv& env, const std::vector<std::size_t>& actions);

// Text view of an action sequence: terminator-delimited alphabet words.
std::string env_actions_to_text(const SyntheticEnv& env, const std::vector<std::size_t>& actions);

// Subgoal block parsed back out of a rendered synthetic prompt.
struct ConditionedSubgoal {
    std::size_t index = 0;
    std::string text;
};
std::vector<ConditionedSubgoal> parse_conditioned_subgoals(const std::string& user_prompt);

// Seeded mixture generator over a SyntheticEnv. Positions with conditioned
// subgoals at their index reuse one of them with probability reuse_bias,
// otherwise sample the base distribution.
class SyntheticGenerator final : public Generator {
public:
    explicit SyntheticGenerator(SyntheticEnv env);

    std::string generate(const GeneratorRequest& request) override;

    const SyntheticEnv& env() const { return env_; }

private:
    SyntheticEnv env_;
};

struct HttpBackendConfig {
    std::string endpoint; // full URL, e.g. http://127.0.0.1:8080/v1/chat/completions
    std::string model_name;
    std::string api_key_env = "TMPC_API_KEY"; // name of the env var holding the key
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds retry_backoff{500};
    int max_in_flight = 4;
};

// One OpenAI-compatible chat-completions call: two-message conversation
// (system, user), first choice's message content returned. Retries once on
// timeout with backoff; the request is never mutated between attempts.
// Throws CredentialError on 401/403, MalformedBodyError on unparseable or
// shape-violating bodies, BackendError otherwise.
std::string http_chat_call(const HttpBackendConfig& config, const GeneratorRequest& request);

class HttpChatGenerator final : public Generator {
public:
    explicit HttpChatGenerator(HttpBackendConfig config);
    ~HttpChatGenerator() override;

    std::string generate(const GeneratorRequest& request) override;

private:
    HttpBackendConfig config_;
    struct Gate;
    Gate* gate_; // bounds in-flight requests
};

} // namespace tmpc

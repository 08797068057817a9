#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmpc/generators.hpp"

namespace tmpc {

enum class Granularity { segment, trajectory };

const char* to_string(Granularity g);

struct ScoreRequest {
    std::string context;   // prompt plus any scored prefix
    std::string candidate; // segment or full response
    Granularity granularity = Granularity::trajectory;
};

// Extra detail some backends can provide alongside the scalar score.
struct ScoreDetail {
    double score = 0.0;
    std::optional<std::vector<bool>> per_test; // pass-rate backends only
};

// Scoring contract: finite real, higher is better. Implementations must be
// safely callable from multiple concurrent workers.
class Reward {
public:
    virtual ~Reward() = default;

    virtual double score(const ScoreRequest& request) = 0;

    virtual ScoreDetail score_detail(const ScoreRequest& request) {
        return ScoreDetail{score(request), std::nullopt};
    }
};

// Token-overlap score in [0, 1]: Jaccard similarity of the two texts' token
// sets after normalization (lowercase, terminators stripped). Exactly 1 only
// when the normalized texts are equal; equal token sets in a different order
// fall back to positional agreement, which is strictly below 1.
double lexical_overlap(std::string_view candidate, std::string_view reference);

// Scores text against a SyntheticEnv's hidden reference. The candidate's
// sentences are aligned to reference positions starting where the context
// ends (context = prompt -> position 0), and each position contributes its
// env reward. Deterministic.
class LexicalEnvReward final : public Reward {
public:
    LexicalEnvReward(SyntheticEnv env, std::string prompt_text);

    double score(const ScoreRequest& request) override;

private:
    std::size_t position_of_context(const std::string& context) const;

    SyntheticEnv env_;
    std::string prompt_text_;
};

// Adds a seeded zero-mean Gaussian with variance sigma^2 to the inner score.
// The draw is a pure function of (seed, request), so results do not depend on
// call order and re-runs reproduce the same noisy sequence. sigma = 0 is the
// identity wrapper.
std::shared_ptr<Reward> with_noise(std::shared_ptr<Reward> inner, double sigma,
                                   std::uint64_t seed);

struct RewardHttpConfig {
    std::string endpoint;
    std::string api_key_env = "TMPC_API_KEY";
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds retry_backoff{500};
};

// POST {context, candidate, granularity} as JSON; expects {"score": number}.
// One retry on timeout. Error taxonomy mirrors http_chat_call.
double http_reward_call(const RewardHttpConfig& config, const ScoreRequest& request);

class HttpReward final : public Reward {
public:
    explicit HttpReward(RewardHttpConfig config) : config_(std::move(config)) {}

    double score(const ScoreRequest& request) override {
        return http_reward_call(config_, request);
    }

private:
    RewardHttpConfig config_;
};

struct TestCase {
    std::string setup;     // executed before the assertion (may be empty)
    std::string assertion; // one checked statement, e.g. "assert f(2) == 4"
};

struct TestSuite {
    std::vector<TestCase> cases;
    std::chrono::milliseconds per_test_timeout{5000};
    std::string entry_point; // function name under test
};

struct SandboxConfig {
    std::size_t memory_limit_bytes = 256ull * 1024 * 1024;
    int max_concurrent = 0; // 0 = hardware concurrency
    std::string python_executable = "python3";
    // Environment variables forwarded into the candidate's process; everything
    // else is dropped.
    std::vector<std::string> env_allowlist = {"PATH", "LANG", "LC_ALL"};
};

struct PassRateResult {
    double rate = 0.0;
    std::vector<bool> per_test;
};

// Runs every case against the candidate in an isolated child process: empty
// environment (allowlist aside), fresh working directory, no network (via a
// new network namespace where available, plus an in-process audit guard),
// memory and CPU limits, per-test wall timeout. Timeouts and crashes count as
// failures. Throws InfrastructureError if the sandbox itself cannot be set
// up; a failing candidate never throws.
PassRateResult pass_rate(const std::string& candidate_code, const TestSuite& suite,
                         const SandboxConfig& sandbox);

// Pass rate as the direct reward for program synthesis.
class PassRateReward final : public Reward {
public:
    PassRateReward(TestSuite suite, SandboxConfig sandbox)
        : suite_(std::move(suite)), sandbox_(std::move(sandbox)) {}

    double score(const ScoreRequest& request) override {
        return pass_rate(request.candidate, suite_, sandbox_).rate;
    }

    ScoreDetail score_detail(const ScoreRequest& request) override {
        const PassRateResult result = pass_rate(request.candidate, suite_, sandbox_);
        return ScoreDetail{result.rate, result.per_test};
    }

private:
    TestSuite suite_;
    SandboxConfig sandbox_;
};

// One MBPP-style problem, loaded verbatim from the official JSON layout
// (task_id, text, code, test_list, optional test_setup_code).
struct MbppTask {
    std::int64_t task_id = 0;
    std::string text;
    std::string reference_code;
    TestSuite suite;
};

std::vector<MbppTask> load_mbpp_file(const std::string& path);

} // namespace tmpc

#include "tmpc/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "tmpc/errors.hpp"
#include "tmpc/rewards.hpp"
#include "tmpc/rng.hpp"

namespace tmpc {
namespace {

constexpr std::array<const char*, 26> kCodeWords = {
    "alpha",  "bravo",    "charlie", "delta", "echo",   "foxtrot", "golf",    "hotel",  "india",
    "juliett", "kilo",    "lima",    "mike",  "november", "oscar", "papa",    "quebec", "romeo",
    "sierra", "tango",    "uniform", "victor", "whiskey", "xray",  "yankee",  "zulu"};

std::string word_for(std::size_t i) {
    if (i < kCodeWords.size()) {
        return kCodeWords[i];
    }
    return "w" + std::to_string(i);
}

bool ends_with_terminator(const std::string& text) {
    if (text.empty()) {
        return false;
    }
    const char c = text.back();
    if (c == '.' || c == '!' || c == '?') {
        return true;
    }
    if (text.size() >= 3) {
        const auto b0 = static_cast<unsigned char>(text[text.size() - 3]);
        const auto b1 = static_cast<unsigned char>(text[text.size() - 2]);
        const auto b2 = static_cast<unsigned char>(text[text.size() - 1]);
        if (b0 == 0xE3 && b1 == 0x80 && b2 == 0x82) return true;
        if (b0 == 0xEF && b1 == 0xBC && (b2 == 0x81 || b2 == 0x9F)) return true;
    }
    return false;
}

std::size_t sample_categorical(Rng& rng, const std::vector<double>& weights) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) {
            return i;
        }
    }
    return weights.size() - 1;
}

} // namespace

void validate_env(const SyntheticEnv& env) {
    if (env.alphabet.empty()) {
        throw ContractViolation("SyntheticEnv: alphabet is empty");
    }
    if (env.episode_length == 0) {
        throw ContractViolation("SyntheticEnv: episode_length must be positive");
    }
    if (env.hidden_reference.size() != env.episode_length) {
        throw ContractViolation("SyntheticEnv: hidden_reference length != episode_length");
    }
    for (const std::string& ref : env.hidden_reference) {
        if (std::find(env.alphabet.begin(), env.alphabet.end(), ref) == env.alphabet.end()) {
            throw ContractViolation("SyntheticEnv: reference segment not in alphabet: " + ref);
        }
    }
    if (env.reuse_bias < 0.0 || env.reuse_bias > 1.0) {
        throw ContractViolation("SyntheticEnv: reuse_bias must lie in [0, 1]");
    }
    if (env.base_distribution.size() != env.episode_length) {
        throw ContractViolation("SyntheticEnv: base_distribution needs one row per position");
    }
    for (const auto& row : env.base_distribution) {
        if (row.size() != env.alphabet.size()) {
            throw ContractViolation("SyntheticEnv: distribution row size != alphabet size");
        }
        double sum = 0.0;
        for (double w : row) {
            if (!(w > 0.0)) {
                throw ContractViolation("SyntheticEnv: distribution weights must be positive");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ContractViolation("SyntheticEnv: distribution row not normalized");
        }
    }
    if (env.reward_shape == RewardShape::delayed_suffix &&
        (env.suffix_len == 0 || env.suffix_len > env.episode_length)) {
        throw ContractViolation("SyntheticEnv: suffix_len out of range");
    }
}

SyntheticEnv make_random_env(std::uint64_t seed, std::size_t alphabet_size,
                             std::size_t episode_length, double reuse_bias, RewardShape shape,
                             std::size_t suffix_len, bool distinct_reference) {
    if (distinct_reference && alphabet_size < episode_length) {
        throw ContractViolation("make_random_env: distinct reference needs alphabet >= length");
    }
    SyntheticEnv env;
    env.seed = seed;
    env.episode_length = episode_length;
    env.reuse_bias = reuse_bias;
    env.reward_shape = shape;
    env.suffix_len = suffix_len;
    env.alphabet.reserve(alphabet_size);
    for (std::size_t i = 0; i < alphabet_size; ++i) {
        env.alphabet.push_back(word_for(i));
    }

    Rng rng(mix_seed(seed, 0x53594e5448ull)); // env-construction stream
    if (distinct_reference) {
        std::vector<std::size_t> order(alphabet_size);
        for (std::size_t i = 0; i < alphabet_size; ++i) {
            order[i] = i;
        }
        for (std::size_t i = 0; i < episode_length; ++i) {
            const std::size_t pick = i + rng.next_index(alphabet_size - i);
            std::swap(order[i], order[pick]);
            env.hidden_reference.push_back(env.alphabet[order[i]]);
        }
    } else {
        for (std::size_t i = 0; i < episode_length; ++i) {
            env.hidden_reference.push_back(env.alphabet[rng.next_index(alphabet_size)]);
        }
    }

    env.base_distribution.assign(episode_length, std::vector<double>(alphabet_size, 0.0));
    for (auto& row : env.base_distribution) {
        double sum = 0.0;
        for (double& w : row) {
            w = 0.5 + rng.next_double();
            sum += w;
        }
        for (double& w : row) {
            w /= sum;
        }
    }
    validate_env(env);
    return env;
}

double env_step_reward(const SyntheticEnv& env, const std::vector<std::size_t>& actions,
                       std::size_t t) {
    if (t >= actions.size() || actions[t] >= env.alphabet.size()) {
        throw ContractViolation("env_step_reward: action index out of range");
    }
    if (env.reward_shape == RewardShape::per_segment) {
        if (t >= env.episode_length) {
            return 0.0;
        }
        return lexical_overlap(env.alphabet[actions[t]], env.hidden_reference[t]);
    }
    // delayed_suffix: everything before the final step is silent; the final
    // step pays one point per trailing position that matches the reference.
    if (t + 1 != env.episode_length) {
        return 0.0;
    }
    double reward = 0.0;
    for (std::size_t i = env.episode_length - env.suffix_len; i < env.episode_length; ++i) {
        if (i < actions.size() && env.alphabet[actions[i]] == env.hidden_reference[i]) {
            reward += 1.0;
        }
    }
    return reward;
}

double env_sequence_utility(const SyntheticEnv& env, const std::vector<std::size_t>& actions) {
    double total = 0.0;
    for (std::size_t t = 0; t < actions.size(); ++t) {
        total += env_step_reward(env, actions, t);
    }
    return total;
}

std::string env_actions_to_text(const SyntheticEnv& env, const std::vector<std::size_t>& actions) {
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out += env.alphabet.at(actions[i]);
        out.push_back('.');
    }
    return out;
}

std::vector<ConditionedSubgoal> parse_conditioned_subgoals(const std::string& user_prompt) {
    std::vector<ConditionedSubgoal> out;
    std::istringstream lines(user_prompt);
    std::string line;
    bool in_block = false;
    while (std::getline(lines, line)) {
        if (!in_block) {
            in_block = line == "Subgoals:";
            continue;
        }
        if (line.rfind("- ", 0) != 0) {
            break; // block ends at the first non-item line
        }
        const std::size_t colon = line.find(": ", 2);
        if (colon == std::string::npos) {
            continue;
        }
        ConditionedSubgoal sg;
        try {
            sg.index = static_cast<std::size_t>(std::stoull(line.substr(2, colon - 2)));
        } catch (const std::exception&) {
            continue;
        }
        sg.text = line.substr(colon + 2);
        if (!sg.text.empty()) {
            out.push_back(std::move(sg));
        }
    }
    return out;
}

SyntheticGenerator::SyntheticGenerator(SyntheticEnv env) : env_(std::move(env)) {
    validate_env(env_);
}

std::string SyntheticGenerator::generate(const GeneratorRequest& request) {
    const std::vector<ConditionedSubgoal> subgoals = parse_conditioned_subgoals(request.user_prompt);
    Rng rng(mix_seed(env_.seed, request.seed.value_or(0)));

    std::string out;
    for (std::size_t p = 0; p < env_.episode_length; ++p) {
        if (p != 0) {
            out.push_back(' ');
        }
        std::string token;
        if (rng.next_double() < env_.reuse_bias) {
            std::vector<const ConditionedSubgoal*> here;
            for (const ConditionedSubgoal& sg : subgoals) {
                if (sg.index == p) {
                    here.push_back(&sg);
                }
            }
            if (!here.empty()) {
                token = here[rng.next_index(here.size())]->text;
            }
        }
        if (token.empty()) {
            const std::size_t pick = sample_categorical(rng, env_.base_distribution[p]);
            token = env_.alphabet[pick];
        }
        if (!ends_with_terminator(token)) {
            token.push_back('.');
        }
        out += token;
    }
    return out;
}

} // namespace tmpc

#include "tmpc/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "tmpc/errors.hpp"
#include "tmpc/rng.hpp"
#include "tmpc/segmentation.hpp"

namespace tmpc {
namespace {

// Lowercased words with sentence terminators stripped.
std::vector<std::string> normalized_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (std::size_t i = 0; i < text.size();) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            flush();
            ++i;
            continue;
        }
        if (c == '.' || c == '!' || c == '?') {
            ++i;
            continue;
        }
        if (i + 3 <= text.size()) {
            const auto b1 = static_cast<unsigned char>(text[i + 1]);
            const auto b2 = static_cast<unsigned char>(text[i + 2]);
            if ((c == 0xE3 && b1 == 0x80 && b2 == 0x82) ||
                (c == 0xEF && b1 == 0xBC && (b2 == 0x81 || b2 == 0x9F))) {
                i += 3;
                continue;
            }
        }
        current.push_back(static_cast<char>(std::tolower(c)));
        ++i;
    }
    flush();
    return tokens;
}

std::string normalized_text(std::string_view text) {
    const std::vector<std::string> tokens = normalized_tokens(text);
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i != 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

class NoisyReward final : public Reward {
public:
    NoisyReward(std::shared_ptr<Reward> inner, double sigma, std::uint64_t seed)
        : inner_(std::move(inner)), sigma_(sigma), seed_(seed) {}

    double score(const ScoreRequest& request) override {
        const double clean = inner_->score(request);
        if (sigma_ == 0.0) {
            return clean;
        }
        return clean + sigma_ * noise_for(request);
    }

    ScoreDetail score_detail(const ScoreRequest& request) override {
        ScoreDetail detail = inner_->score_detail(request);
        if (sigma_ != 0.0) {
            detail.score += sigma_ * noise_for(request);
        }
        return detail;
    }

private:
    // Content-keyed draw: independent of call order, reproducible per request.
    double noise_for(const ScoreRequest& request) const {
        std::uint64_t key = hash_bytes(request.context, seed_);
        key = hash_bytes(request.candidate, key);
        key = mix_seed(key, request.granularity == Granularity::segment ? 1 : 2);
        Rng rng(key);
        return rng.next_gaussian();
    }

    std::shared_ptr<Reward> inner_;
    double sigma_;
    std::uint64_t seed_;
};

} // namespace

const char* to_string(Granularity g) {
    return g == Granularity::segment ? "segment" : "trajectory";
}

double lexical_overlap(std::string_view candidate, std::string_view reference) {
    if (normalized_text(candidate) == normalized_text(reference)) {
        return 1.0;
    }
    const std::vector<std::string> cand_tokens = normalized_tokens(candidate);
    const std::vector<std::string> ref_tokens = normalized_tokens(reference);
    const std::set<std::string> cand(cand_tokens.begin(), cand_tokens.end());
    const std::set<std::string> ref(ref_tokens.begin(), ref_tokens.end());
    if (cand.empty() || ref.empty()) {
        return 0.0;
    }
    std::size_t common = 0;
    for (const std::string& token : cand) {
        common += ref.count(token);
    }
    const std::size_t unions = cand.size() + ref.size() - common;
    const double jaccard = static_cast<double>(common) / static_cast<double>(unions);
    if (jaccard < 1.0) {
        return jaccard;
    }
    // Same token set, different text: fall back to positional agreement,
    // which cannot reach 1 here.
    const std::size_t longest = std::max(cand_tokens.size(), ref_tokens.size());
    std::size_t agree = 0;
    for (std::size_t i = 0; i < std::min(cand_tokens.size(), ref_tokens.size()); ++i) {
        if (cand_tokens[i] == ref_tokens[i]) {
            ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(longest);
}

LexicalEnvReward::LexicalEnvReward(SyntheticEnv env, std::string prompt_text)
    : env_(std::move(env)), prompt_text_(std::move(prompt_text)) {
    validate_env(env_);
}

std::size_t LexicalEnvReward::position_of_context(const std::string& context) const {
    std::string rest = context;
    if (rest.rfind(prompt_text_, 0) == 0) {
        rest = rest.substr(prompt_text_.size());
    }
    return split_sentences(rest).size();
}

double LexicalEnvReward::score(const ScoreRequest& request) {
    const std::size_t start = request.granularity == Granularity::trajectory
                                  ? 0
                                  : position_of_context(request.context);
    const std::vector<std::string> sentences = split_sentences(request.candidate);

    if (env_.reward_shape == RewardShape::per_segment) {
        double total = 0.0;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            const std::size_t pos = start + i;
            if (pos >= env_.episode_length) {
                break;
            }
            total += lexical_overlap(sentences[i], env_.hidden_reference[pos]);
        }
        return total;
    }

    // delayed_suffix: reconstruct the full word sequence and pay the suffix
    // reward only if the candidate covers the final position.
    if (start + sentences.size() < env_.episode_length) {
        return 0.0;
    }
    std::vector<std::string> words;
    {
        std::string rest = request.context;
        if (rest.rfind(prompt_text_, 0) == 0) {
            rest = rest.substr(prompt_text_.size());
        }
        for (const std::string& s : split_sentences(rest)) {
            words.push_back(normalized_text(s));
        }
    }
    for (const std::string& s : sentences) {
        words.push_back(normalized_text(s));
    }
    double reward = 0.0;
    for (std::size_t i = env_.episode_length - env_.suffix_len; i < env_.episode_length; ++i) {
        if (i < words.size() && words[i] == normalized_text(env_.hidden_reference[i])) {
            reward += 1.0;
        }
    }
    return reward;
}

std::shared_ptr<Reward> with_noise(std::shared_ptr<Reward> inner, double sigma,
                                   std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ContractViolation("with_noise: sigma must be finite and >= 0");
    }
    return std::make_shared<NoisyReward>(std::move(inner), sigma, seed);
}

std::vector<MbppTask> load_mbpp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ContractViolation("load_mbpp_file: cannot open " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedBodyError("load_mbpp_file: invalid JSON in " + path + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw MalformedBodyError("load_mbpp_file: expected a top-level array");
    }

    std::vector<MbppTask> tasks;
    tasks.reserve(doc.size());
    for (const auto& item : doc) {
        MbppTask task;
        task.task_id = item.at("task_id").get<std::int64_t>();
        task.text = item.at("text").get<std::string>();
        task.reference_code = item.value("code", std::string{});
        const std::string setup = item.value("test_setup_code", std::string{});
        for (const auto& assertion : item.at("test_list")) {
            task.suite.cases.push_back(TestCase{setup, assertion.get<std::string>()});
        }
        if (task.suite.cases.empty()) {
            throw MalformedBodyError("load_mbpp_file: task " + std::to_string(task.task_id) +
                                     " has an empty test_list");
        }
        // Entry point: first identifier called in the first assertion.
        const std::string& first = task.suite.cases.front().assertion;
        const std::size_t paren = first.find('(');
        if (paren != std::string::npos) {
            std::size_t begin = paren;
            while (begin > 0) {
                const auto c = static_cast<unsigned char>(first[begin - 1]);
                if (std::isalnum(c) || c == '_') {
                    --begin;
                } else {
                    break;
                }
            }
            task.suite.entry_point = first.substr(begin, paren - begin);
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

} // namespace tmpc

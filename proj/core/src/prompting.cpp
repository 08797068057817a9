#include "tmpc/prompting.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tmpc/errors.hpp"

namespace tmpc {
namespace {

constexpr const char* kTranslationUser =
    "Translate the following source paragraph completely and from scratch. Produce one\n"
    "coherent translation of the entire paragraph; never stitch fragments together.\n"
    "\n"
    "### Source Paragraph\n"
    "{{source}}\n"
    "\n"
    "### Validated Sentence Pairs\n"
    "{{few_shot_block}}\n"
    "\n"
    "### Your Translation\n";

constexpr const char* kLongformUser =
    "{{question}}\n"
    "\n"
    "### High-Scoring Excerpts\n"
    "{{excerpt_block}}\n"
    "\n"
    "Synthesize the high-scoring ideas and phrases above into a single, comprehensive,\n"
    "and well-structured response. Write the complete response from scratch; do not\n"
    "stitch the excerpts together verbatim.\n";

constexpr const char* kCodeSystem =
    "{{strategy}}\n"
    "You must only output a single, complete Python code block.\n"
    "Do not include any explanations or surrounding text.\n";

constexpr const char* kCodeUser =
    "### Problem Description\n"
    "{{problem}}\n"
    "\n"
    "### Public Test Cases\n"
    "{{public_tests}}\n"
    "\n"
    "### Insights from Promising States\n"
    "{{insights}}\n"
    "\n"
    "### Your Python Solution\n"
    "```python\n";

constexpr const char* kSyntheticUser =
    "{{prompt}}\n"
    "\n"
    "Subgoals:\n"
    "{{subgoal_block}}\n";

std::string replace_all(std::string text, const std::string& needle,
                        const std::string& replacement) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), replacement);
        pos += replacement.size();
    }
    return text;
}

} // namespace

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        s.templates_["translation_user"] = kTranslationUser;
        s.templates_["longform_user"] = kLongformUser;
        s.templates_["code_system"] = kCodeSystem;
        s.templates_["code_user"] = kCodeUser;
        s.templates_["synthetic_user"] = kSyntheticUser;
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
    TemplateSet set = builtin();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") {
            continue;
        }
        std::ifstream in(entry.path());
        if (!in) {
            throw ContractViolation("TemplateSet: cannot read " + entry.path().string());
        }
        std::ostringstream content;
        content << in.rdbuf();
        set.templates_[entry.path().stem().string()] = content.str();
    }
    return set;
}

const std::string& TemplateSet::raw(const std::string& name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw ContractViolation("TemplateSet: unknown template " + name);
    }
    return it->second;
}

std::string TemplateSet::render(const std::string& name,
                                const std::map<std::string, std::string>& values) const {
    std::string out = raw(name);
    for (const auto& [key, value] : values) {
        out = replace_all(std::move(out), "{{" + key + "}}", value);
    }
    return out;
}

std::vector<std::string> TemplateSet::names() const {
    std::vector<std::string> out;
    out.reserve(templates_.size());
    for (const auto& [name, _] : templates_) {
        out.push_back(name);
    }
    return out;
}

const std::vector<std::string>& translation_portfolio() {
    static const std::vector<std::string> portfolio = {
        "You are a careful translator. Work through the source sentence by sentence, "
        "making sure every sentence is rendered in order and none is dropped.",
        "You are a precise translator. Produce a literal, accurate translation that "
        "preserves the exact meaning, terminology, and register of the source.",
        "You are a literary translator. Produce an imaginative, stylistically rich "
        "translation that reads naturally while staying faithful to the source.",
    };
    return portfolio;
}

const std::vector<std::string>& longform_portfolio() {
    static const std::vector<std::string> portfolio = {
        "You are a helpful assistant. Keep your answer concise and clear.",
        "You are a helpful assistant. Give a detailed and informative answer.",
        "You are a helpful assistant. Give a balanced and well-structured answer.",
    };
    return portfolio;
}

const std::vector<std::string>& code_portfolio() {
    static const std::vector<std::string> portfolio = {
        "Refine and debug the current best solution. Focus on the failing test cases "
        "and make targeted, incremental fixes to the existing logic.",
        "Solve the problem with a fundamentally different approach from previous "
        "attempts, for example a recursive formulation instead of iteration, or "
        "functions from the collections or itertools libraries.",
        "Write a robust and efficient Python function, paying close attention to edge "
        "cases like empty lists or invalid inputs, drawing inspiration from previously "
        "successful logic.",
    };
    return portfolio;
}

const std::vector<std::string>& synthetic_portfolio() {
    static const std::vector<std::string> portfolio = {
        "explore",
        "exploit",
        "balanced",
    };
    return portfolio;
}

PromptPlan build_translation_prompt(const std::string& source,
                                    const std::vector<SubgoalEntry>& subgoals,
                                    const std::string& system_variant,
                                    const TemplateSet& templates) {
    std::string block;
    for (const SubgoalEntry& entry : subgoals) {
        if (!entry.aligned_source.has_value()) {
            throw ContractViolation("build_translation_prompt: subgoal without aligned_source "
                                    "(payload: " + entry.payload_text() + ")");
        }
        block += "Source: " + *entry.aligned_source + "\n";
        block += "Translation: " + entry.payload_text() + "\n\n";
    }
    if (!block.empty()) {
        block.erase(block.size() - 1); // single trailing newline
    }
    PromptPlan plan;
    plan.system_prompt = system_variant;
    plan.user_prompt = templates.render("translation_user",
                                        {{"source", source}, {"few_shot_block", block}});
    plan.rendered_subgoal_count = subgoals.size();
    return plan;
}

PromptPlan build_longform_prompt(const std::string& question,
                                 const std::vector<SubgoalEntry>& subgoals,
                                 const std::string& system_variant,
                                 const TemplateSet& templates) {
    std::string block;
    for (std::size_t i = 0; i < subgoals.size(); ++i) {
        block += std::to_string(i + 1) + ". \"" + subgoals[i].payload_text() + "\"\n";
    }
    if (!block.empty()) {
        block.pop_back();
    }
    PromptPlan plan;
    plan.system_prompt = system_variant;
    plan.user_prompt = templates.render("longform_user",
                                        {{"question", question}, {"excerpt_block", block}});
    plan.rendered_subgoal_count = subgoals.size();
    return plan;
}

PromptPlan build_code_prompt(const std::string& problem, const std::string& public_tests,
                             const std::vector<SubgoalEntry>& subgoals,
                             const std::string& system_variant,
                             const TemplateSet& templates) {
    std::string insights;
    for (const SubgoalEntry& entry : subgoals) {
        insights += "- " + entry.payload_text() + "\n";
    }
    if (!insights.empty()) {
        insights.pop_back();
    }
    PromptPlan plan;
    plan.system_prompt = templates.render("code_system", {{"strategy", system_variant}});
    plan.user_prompt = templates.render("code_user", {{"problem", problem},
                                                      {"public_tests", public_tests},
                                                      {"insights", insights}});
    plan.rendered_subgoal_count = subgoals.size();
    return plan;
}

PromptPlan build_synthetic_prompt(const std::string& prompt,
                                  const std::vector<SubgoalEntry>& subgoals,
                                  const std::string& system_variant,
                                  const TemplateSet& templates) {
    std::string block;
    for (const SubgoalEntry& entry : subgoals) {
        const std::size_t index =
            entry.kind == SubgoalEntry::Kind::text_segment ? entry.segment.index : 0;
        block += "- " + std::to_string(index) + ": " + entry.payload_text() + "\n";
    }
    if (block.empty()) {
        block = "(none)";
    } else {
        block.pop_back();
    }
    PromptPlan plan;
    plan.system_prompt = system_variant;
    plan.user_prompt = templates.render("synthetic_user",
                                        {{"prompt", prompt}, {"subgoal_block", block}});
    plan.rendered_subgoal_count = subgoals.size();
    return plan;
}

std::string extract_code_block(const std::string& completion) {
    std::string result;
    const std::size_t open = completion.find("```");
    if (open == std::string::npos) {
        // No fence: trimmed passthrough.
        std::size_t begin = completion.find_first_not_of(" \t\r\n");
        std::size_t end = completion.find_last_not_of(" \t\r\n");
        if (begin != std::string::npos) {
            result = completion.substr(begin, end - begin + 1);
        }
    } else {
        std::size_t body = completion.find('\n', open);
        if (body == std::string::npos) {
            body = open + 3;
        } else {
            ++body;
        }
        const std::size_t close = completion.find("```", body);
        result = close == std::string::npos ? completion.substr(body)
                                            : completion.substr(body, close - body);
        while (!result.empty() && (result.back() == '\n' || result.back() == '\r')) {
            result.pop_back();
        }
    }
    if (result.empty()) {
        throw EmptyResponseError("extract_code_block: no code found in completion");
    }
    return result;
}

} // namespace tmpc

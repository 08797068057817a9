#pragma once

#include <map>
#include <string>
#include <vector>

#include "tmpc/subgoal.hpp"

namespace tmpc {

// A fully rendered generation request body.
struct PromptPlan {
    std::string system_prompt;
    std::string user_prompt;
    std::size_t rendered_subgoal_count = 0;
};

// Named templates with {{placeholder}} substitution. The compiled-in set is
// the source of truth; a directory of .txt files with the same names can
// override it so prompts are editable without rebuilding.
class TemplateSet {
public:
    static const TemplateSet& builtin();
    static TemplateSet load_dir(const std::string& dir);

    const std::string& raw(const std::string& name) const;
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& values) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::string> templates_;
};

// System-prompt portfolios, one entry per generation strategy.
const std::vector<std::string>& translation_portfolio();
const std::vector<std::string>& longform_portfolio();
const std::vector<std::string>& code_portfolio();
const std::vector<std::string>& synthetic_portfolio();

// Few-shot translation prompt: full source paragraph plus validated
// (source sentence -> translated segment) pairs. Every subgoal must carry
// aligned_source. Always instructs a complete fresh translation.
PromptPlan build_translation_prompt(const std::string& source,
                                    const std::vector<SubgoalEntry>& subgoals,
                                    const std::string& system_variant,
                                    const TemplateSet& templates = TemplateSet::builtin());

// Long-form prompt: the question plus quoted high-scoring excerpts with an
// instruction to produce one complete response.
PromptPlan build_longform_prompt(const std::string& question,
                                 const std::vector<SubgoalEntry>& subgoals,
                                 const std::string& system_variant,
                                 const TemplateSet& templates = TemplateSet::builtin());

// Program-synthesis prompt in the fixed section layout (problem description,
// public test cases, insights from promising states, solution slot). Subgoals
// are strategy directives.
PromptPlan build_code_prompt(const std::string& problem, const std::string& public_tests,
                             const std::vector<SubgoalEntry>& subgoals,
                             const std::string& system_variant,
                             const TemplateSet& templates = TemplateSet::builtin());

// Synthetic-environment prompt: the prompt text plus an indexed subgoal block
// the synthetic generator knows how to read back.
PromptPlan build_synthetic_prompt(const std::string& prompt,
                                  const std::vector<SubgoalEntry>& subgoals,
                                  const std::string& system_variant,
                                  const TemplateSet& templates = TemplateSet::builtin());

// Content of the first fenced code block; the whole trimmed completion when
// no fence exists. Throws EmptyResponseError when the result is empty.
std::string extract_code_block(const std::string& completion);

} // namespace tmpc

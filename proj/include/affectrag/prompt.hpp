#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affectrag/affect.hpp"
#include "affectrag/corpus.hpp"

namespace affectrag {

enum class Template { T1, T2 };

struct PromptConfig {
    Template tmpl = Template::T1;
    Dataset dataset = Dataset::Custom;
    std::optional<AffectDimension> dimension;  // required for T2
    size_t k = 4;
    size_t max_example_chars = 0;  // 0 = no truncation
    std::optional<std::string> custom_task_prompt;  // required for Custom datasets
};

struct RenderedPrompt {
    std::string text;  // ends with the answer cue line, no trailing newline
    std::vector<std::string> example_ids;
    std::vector<int> example_labels;
};

// One retrieved demonstration, in retrieval-score order. affect_value is the
// format_affect string for the prompt's dimension (unused by Template 1).
struct PromptExample {
    std::string doc_id;
    std::string text;
    int label = 0;
    std::string affect_value;
};

// Dataset task instruction ("Determine whether the target text is 0. Fake or
// 1. Legit." etc). Custom datasets must supply their own.
std::string task_prompt(Dataset dataset,
                        const std::optional<std::string>& custom = std::nullopt);

// "Sentiment intensity: 0.234", "Anger intensity class: high",
// "Emotions: anger, fear" / "Emotions: neutral or no emotion".
std::string format_affect(const AffectDimension& dim, const ExplicitAffect& affect);
std::string format_affect_value(const AffectDimension& dim, const AffectValue& value);

// Lowercase dimension phrase for the Template 2 header ("sentiment intensity").
std::string dimension_phrase(const AffectDimension& dim);

RenderedPrompt render_t1(const PromptConfig& config, const LabelScheme& scheme,
                         const std::string& target_text, std::span<const PromptExample> examples);

RenderedPrompt render_t2(const PromptConfig& config, const LabelScheme& scheme,
                         const std::string& target_text, const std::string& target_affect,
                         std::span<const PromptExample> examples);

}  // namespace affectrag

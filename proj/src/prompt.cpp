#include "affectrag/prompt.hpp"

#include <cctype>
#include <iomanip>
#include <sstream>

#include "affectrag/util.hpp"

namespace affectrag {

std::string task_prompt(Dataset dataset, const std::optional<std::string>& custom) {
    if (custom) return *custom;
    switch (dataset) {
        case Dataset::AMTCele:
            return "Determine whether the target text is 0. Fake or 1. Legit.";
        case Dataset::PHEME:
            return "Determine if the target text is 0. non-rumours or 1. rumours.";
        case Dataset::COCO:
            return "Classify the text regarding COVID-19 conspiracy theories or misinformation "
                   "into one of the following three classes: 0. Unrelated. 1. Related (but not "
                   "supporting). 2. Conspiracy (related and supporting).";
        case Dataset::Custom:
            throw DataError("custom dataset has no built-in task prompt; configure one");
    }
    throw DataError("unknown dataset");
}

static std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

static std::string three_decimals(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

std::string format_affect_value(const AffectDimension& dim, const AffectValue& value) {
    check_affect_value(dim, value);
    switch (dim.kind) {
        case AffectKind::Vreg:
            return "Sentiment intensity: " + three_decimals(std::get<double>(value));
        case AffectKind::EIreg:
            return capitalize(emotion_name(*dim.emotion)) + " intensity: " +
                   three_decimals(std::get<double>(value));
        case AffectKind::Voc:
            return "Sentiment class: " +
                   std::string(kVocClassNames[static_cast<size_t>(std::get<int>(value))]);
        case AffectKind::EIoc:
            return capitalize(emotion_name(*dim.emotion)) + " intensity class: " +
                   std::string(kEIocClassNames[static_cast<size_t>(std::get<int>(value))]);
        case AffectKind::Ec: {
            const auto& s = std::get<std::set<std::string>>(value);
            if (s.empty()) return "Emotions: neutral or no emotion";
            std::string joined;
            for (const auto& name : s) {
                if (!joined.empty()) joined += ", ";
                joined += name;
            }
            return "Emotions: " + joined;
        }
    }
    throw DataError("unhandled dimension");
}

std::string format_affect(const AffectDimension& dim, const ExplicitAffect& affect) {
    return format_affect_value(dim, affect.get(dim));
}

std::string dimension_phrase(const AffectDimension& dim) {
    switch (dim.kind) {
        case AffectKind::Vreg: return "sentiment intensity";
        case AffectKind::Voc: return "sentiment class";
        case AffectKind::EIreg: return emotion_name(*dim.emotion) + " intensity";
        case AffectKind::EIoc: return emotion_name(*dim.emotion) + " intensity class";
        case AffectKind::Ec: return "emotions";
    }
    return "affect";
}

// Appends a segment as a new sentence: a ". " separator unless the
// accumulated text already ends in sentence punctuation.
static void append_sentence(std::string& acc, const std::string& segment) {
    while (!acc.empty() && std::isspace(static_cast<unsigned char>(acc.back()))) acc.pop_back();
    if (acc.empty()) {
        acc = segment;
        return;
    }
    char last = acc.back();
    acc += (last == '.' || last == '!' || last == '?') ? " " : ". ";
    acc += segment;
}

static std::string truncate_text(const std::string& text, size_t max_chars) {
    if (max_chars == 0 || text.size() <= max_chars) return text;
    return text.substr(0, max_chars) + "...";
}

static std::string label_phrase(const LabelScheme& scheme, int label) {
    return "The label of this text: " + std::to_string(label) + ". " + scheme.name_of(label);
}

static RenderedPrompt render(const PromptConfig& config, const LabelScheme& scheme,
                             const std::string& target_text, const std::string& target_affect,
                             std::span<const PromptExample> examples) {
    if (trim(target_text).empty()) throw DataError("render: empty target text");
    if (examples.size() > config.k)
        throw DataError("render: " + std::to_string(examples.size()) + " examples exceed k=" +
                        std::to_string(config.k));
    bool with_affect = config.tmpl == Template::T2;
    if (with_affect && !config.dimension)
        throw DataError("render: Template 2 requires an affect dimension");

    RenderedPrompt out;
    std::ostringstream text;
    text << "Task: " << task_prompt(config.dataset, config.custom_task_prompt) << "\n";

    if (with_affect) {
        if (trim(target_affect).empty())
            throw DataError("render: missing target affect value for Template 2");
        std::string target_line = target_text;
        append_sentence(target_line, target_affect);
        target_line += ".";
        text << "Target text: " << target_line << "\n";
        text << "Here are a few examples retrieved through " << dimension_phrase(*config.dimension)
             << ":\n";
    } else {
        text << "Target text: " << target_text << "\n";
        if (!examples.empty()) text << "Here are a few examples:\n";
    }

    for (const auto& ex : examples) {
        if (with_affect && trim(ex.affect_value).empty())
            throw DataError("render: missing affect value for example " + ex.doc_id);
        std::string line = truncate_text(ex.text, config.max_example_chars);
        if (with_affect) append_sentence(line, ex.affect_value);
        append_sentence(line, label_phrase(scheme, ex.label));
        line += ".";
        text << "Text: " << line << "\n";
        out.example_ids.push_back(ex.doc_id);
        out.example_labels.push_back(ex.label);
    }

    text << "According to the above information, the label of target text:";
    out.text = text.str();
    return out;
}

RenderedPrompt render_t1(const PromptConfig& config, const LabelScheme& scheme,
                         const std::string& target_text, std::span<const PromptExample> examples) {
    PromptConfig c = config;
    c.tmpl = Template::T1;
    return render(c, scheme, target_text, "", examples);
}

RenderedPrompt render_t2(const PromptConfig& config, const LabelScheme& scheme,
                         const std::string& target_text, const std::string& target_affect,
                         std::span<const PromptExample> examples) {
    PromptConfig c = config;
    c.tmpl = Template::T2;
    return render(c, scheme, target_text, target_affect, examples);
}

}  // namespace affectrag

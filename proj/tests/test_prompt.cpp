#include "affectrag/prompt.hpp"

#include <fstream>

#include "affectrag/util.hpp"
#include "doctest.h"

using namespace affectrag;

namespace {

std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(AFFECTRAG_FIXTURE_DIR) + "/" + name, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("task prompts carry the published label wordings") {
    CHECK(task_prompt(Dataset::AMTCele).find("0. Fake or 1. Legit") != std::string::npos);
    CHECK(task_prompt(Dataset::PHEME).find("0. non-rumours or 1. rumours") != std::string::npos);
    CHECK(task_prompt(Dataset::COCO).find("one of the following three classes") !=
          std::string::npos);
    CHECK(task_prompt(Dataset::COCO).find("2. Conspiracy (related and supporting)") !=
          std::string::npos);
    CHECK(task_prompt(Dataset::PHEME) == task_prompt(Dataset::PHEME));
    CHECK_THROWS_AS(task_prompt(Dataset::Custom), DataError);
    CHECK(task_prompt(Dataset::Custom, std::string("Custom task.")) == "Custom task.");
}

TEST_CASE("format_affect renders each dimension's value shape") {
    ExplicitAffect ea;
    ea.vreg = 0.429;
    ea.voc = 5;
    ea.ec = std::set<std::string>{"fear", "anger"};
    ea.eireg[Emotion::Anger] = 0.5;
    ea.eioc[Emotion::Fear] = 3;

    CHECK(format_affect(AffectDimension::vreg(), ea) == "Sentiment intensity: 0.429");
    CHECK(format_affect(AffectDimension::voc(), ea) == "Sentiment class: moderately positive");
    CHECK(format_affect(AffectDimension::ec(), ea) == "Emotions: anger, fear");
    CHECK(format_affect(AffectDimension::eireg(Emotion::Anger), ea) == "Anger intensity: 0.500");
    CHECK(format_affect(AffectDimension::eioc(Emotion::Fear), ea) ==
          "Fear intensity class: high");

    ea.ec = std::set<std::string>{};
    CHECK(format_affect(AffectDimension::ec(), ea) == "Emotions: neutral or no emotion");
    CHECK_THROWS_AS(format_affect(AffectDimension::eireg(Emotion::Joy), ea), DataError);
}

TEST_CASE("template 1 golden bytes") {
    PromptConfig config;
    config.dataset = Dataset::PHEME;
    config.k = 4;
    LabelScheme scheme = LabelScheme::builtin(Dataset::PHEME);

    std::vector<PromptExample> examples = {
        {"src-17", "Unconfirmed reports say the bridge has been closed", 1, ""},
        {"src-04", "Officials have released the updated casualty figures.", 0, ""},
        {"src-29", "Witnesses describe a loud bang near the market!", 1, ""},
        {"src-11", "The mayor will hold a press conference at noon", 0, ""},
    };
    RenderedPrompt p = render_t1(config, scheme,
                                 "Breaking: second suspect reportedly seen near the station",
                                 examples);
    CHECK(p.text == read_fixture("prompt_t1_pheme.txt"));
    CHECK(p.example_ids == std::vector<std::string>{"src-17", "src-04", "src-29", "src-11"});
    CHECK(p.example_labels == std::vector<int>{1, 0, 1, 0});
}

TEST_CASE("template 2 golden bytes") {
    PromptConfig config;
    config.dataset = Dataset::PHEME;
    config.dimension = AffectDimension::vreg();
    config.k = 4;
    LabelScheme scheme = LabelScheme::builtin(Dataset::PHEME);

    std::vector<PromptExample> examples = {
        {"src-17", "Unconfirmed reports say the bridge has been closed", 1,
         "Sentiment intensity: 0.429"},
        {"src-04", "Officials have released the updated casualty figures.", 0,
         "Sentiment intensity: 0.512"},
    };
    RenderedPrompt p = render_t2(config, scheme,
                                 "Update: further disruption reported on the northern line",
                                 "Sentiment intensity: 0.234", examples);
    CHECK(p.text == read_fixture("prompt_t2_pheme_vreg.txt"));
    CHECK(p.text.find("Sentiment intensity: 0.234") != std::string::npos);
    CHECK(p.text.find("The label of this text: 1. rumours.") != std::string::npos);
}

TEST_CASE("zero-example renderings") {
    LabelScheme scheme = LabelScheme::builtin(Dataset::AMTCele);
    PromptConfig config;
    config.dataset = Dataset::AMTCele;
    config.dimension = AffectDimension::vreg();
    config.k = 4;

    SUBCASE("template 1 drops the examples header entirely") {
        RenderedPrompt p =
            render_t1(config, scheme, "The studio announced a sequel for next spring.", {});
        CHECK(p.text == read_fixture("prompt_t1_amtcele_zeroshot.txt"));
        CHECK(p.example_ids.empty());
        CHECK(p.text.find("Here are a few examples") == std::string::npos);
    }

    SUBCASE("template 2 keeps the header line") {
        RenderedPrompt p = render_t2(config, scheme,
                                     "The studio announced a sequel for next spring.",
                                     "Sentiment intensity: 0.700", {});
        CHECK(p.text == read_fixture("prompt_t2_amtcele_zeroshot.txt"));
        CHECK(p.text.find("Here are a few examples retrieved through sentiment intensity:") !=
              std::string::npos);
    }
}

TEST_CASE("rendering is deterministic and bounded by k") {
    LabelScheme scheme = LabelScheme::builtin(Dataset::PHEME);
    PromptConfig config;
    config.dataset = Dataset::PHEME;
    config.k = 2;
    std::vector<PromptExample> examples = {{"a", "one text", 0, ""}, {"b", "two text", 1, ""}};

    RenderedPrompt p1 = render_t1(config, scheme, "target", examples);
    RenderedPrompt p2 = render_t1(config, scheme, "target", examples);
    CHECK(p1.text == p2.text);

    std::vector<PromptExample> three = examples;
    three.push_back({"c", "three text", 0, ""});
    CHECK_THROWS_AS(render_t1(config, scheme, "target", three), DataError);
    CHECK_THROWS_AS(render_t1(config, scheme, "  ", examples), DataError);
}

TEST_CASE("t2 requires affect values") {
    LabelScheme scheme = LabelScheme::builtin(Dataset::PHEME);
    PromptConfig config;
    config.dataset = Dataset::PHEME;
    config.dimension = AffectDimension::vreg();
    config.k = 2;
    std::vector<PromptExample> missing = {{"a", "one text", 0, ""}};
    CHECK_THROWS_AS(render_t2(config, scheme, "target", "Sentiment intensity: 0.300", missing),
                    DataError);
    CHECK_THROWS_AS(render_t2(config, scheme, "target", "", {}), DataError);

    PromptConfig no_dim = config;
    no_dim.dimension.reset();
    CHECK_THROWS_AS(render_t2(no_dim, scheme, "target", "Sentiment intensity: 0.300", {}),
                    DataError);
}

TEST_CASE("truncation cuts example texts with a visible marker, never the target") {
    LabelScheme scheme = LabelScheme::builtin(Dataset::PHEME);
    PromptConfig config;
    config.dataset = Dataset::PHEME;
    config.k = 1;
    config.max_example_chars = 10;
    std::string long_text(100, 'x');
    std::vector<PromptExample> examples = {{"a", long_text, 1, ""}};

    RenderedPrompt p = render_t1(config, scheme, long_text, examples);
    CHECK(p.text.find("Text: xxxxxxxxxx...") != std::string::npos);
    CHECK(p.text.find("Target text: " + long_text) != std::string::npos);
}

TEST_CASE("t1 and t2 differ only in affect insertions and header wording") {
    LabelScheme scheme = LabelScheme::builtin(Dataset::PHEME);
    PromptConfig config;
    config.dataset = Dataset::PHEME;
    config.dimension = AffectDimension::vreg();
    config.k = 1;
    std::vector<PromptExample> t1_examples = {{"a", "shared example text.", 1, ""}};
    std::vector<PromptExample> t2_examples = {
        {"a", "shared example text.", 1, "Sentiment intensity: 0.100"}};

    std::string t1 = render_t1(config, scheme, "shared target.", t1_examples).text;
    std::string t2 =
        render_t2(config, scheme, "shared target.", "Sentiment intensity: 0.200", t2_examples).text;

    // strip the affect fragments and the header qualifier; the rest matches
    auto erase_all = [](std::string s, const std::string& needle) {
        size_t pos;
        while ((pos = s.find(needle)) != std::string::npos) s.erase(pos, needle.size());
        return s;
    };
    std::string t2_stripped = erase_all(t2, " Sentiment intensity: 0.200.");
    t2_stripped = erase_all(t2_stripped, " Sentiment intensity: 0.100.");
    t2_stripped = erase_all(t2_stripped, " retrieved through sentiment intensity");
    std::string t1_normalized = t1;
    // T1 separates target and example text from the label phrase identically
    CHECK(t2_stripped == t1_normalized);
}

#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>

#include "affectrag/affect_cache.hpp"
#include "affectrag/index.hpp"
#include "affectrag/prompt.hpp"
#include "affectrag/util.hpp"

namespace affectrag {

// Text-generation contract. generate() either returns the raw completion or
// throws; determinism is expected at temperature 0.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string model_name() const = 0;
    virtual std::string generate(const std::string& prompt) = 0;
};

// Returns a fixed canned string.
class EchoLlm : public LlmClient {
public:
    explicit EchoLlm(std::string reply, std::string name = "echo")
        : reply_(std::move(reply)), name_(std::move(name)) {}
    std::string model_name() const override { return name_; }
    std::string generate(const std::string&) override { return reply_; }

private:
    std::string reply_;
    std::string name_;
};

// Votes the modal label among the prompt's rendered example lines
// ("The label of this text: <int>. <name>."), ties to the lowest integer.
// Reads the real prompt bytes rather than any side channel, so it exercises
// the full render path. Returns an empty string when no examples are present.
class MajorityVoteLlm : public LlmClient {
public:
    std::string model_name() const override { return "majority-vote"; }
    std::string generate(const std::string& prompt) override;

    // Exposed for tests: the (label, name) pairs parsed from a prompt.
    static std::vector<std::pair<int, std::string>> parse_example_labels(const std::string& prompt);
};

// OpenAI-compatible chat-completions client: POST {base_url}/chat/completions
// with a single user message; bearer token from the environment.
struct HttpLlmOptions {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string model;
    double temperature = 0.0;
    int max_output_tokens = 64;
    std::string token_env = "AFFECTRAG_LLM_TOKEN";
    std::optional<std::string> system_prompt;  // omitted by default
    int timeout_sec = 120;
    RetryPolicy retry;
    double requests_per_minute = 0;  // 0 = unlimited
};

class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(HttpLlmOptions options);
    ~HttpLlmClient() override;
    std::string model_name() const override { return options_.model; }
    std::string generate(const std::string& prompt) override;

private:
    HttpLlmOptions options_;
    TokenBucket bucket_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// File-backed completion cache keyed by (model_name, prompt_hash). Appends are
// idempotent; a warm rerun issues zero client calls.
class ResponseCache {
public:
    explicit ResponseCache(const std::filesystem::path& file = {});
    std::optional<std::string> get(const std::string& model, const std::string& prompt_hash) const;
    void put(const std::string& model, const std::string& prompt_hash, const std::string& text);

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::map<std::pair<std::string, std::string>, std::string> entries_;
};

std::string prompt_hash(const std::string& prompt);

// Cache-first generation with retry/backoff on transport errors.
std::string generate(LlmClient& client, ResponseCache& cache, const std::string& prompt,
                     const RetryPolicy& retry = {});

// First "<int>." token whose integer is in the scheme wins; decimals like
// "0.234" do not count. Falls back to case-insensitive whole-word class
// names. No match -> nullopt (Unparseable).
std::optional<int> parse_label(const std::string& raw, const LabelScheme& scheme);

struct Prediction {
    std::string doc_id;
    std::string raw_output;
    std::optional<int> parsed_label;
    int gold = 0;
    std::vector<std::string> example_ids;
    std::string prompt_hash;
    bool transport_failed = false;
};

struct PipelineConfig {
    AffectDimension dimension;
    uint32_t width = 16;
    size_t k = 4;
    double threshold = 0.2;
    size_t max_inflight = 4;
    double max_transport_failure_rate = 0.05;
    std::filesystem::path cache_dir;  // response + annotation caches; empty = in-memory
    bool force = false;
    // Baseline mode: sample k source examples uniformly (seeded) instead of
    // affect retrieval.
    bool random_examples = false;
    uint64_t random_seed = 0;
};

// Retrieval -> rendering -> generation -> parsing for every target document.
// Template 2 prompts pull explicit affect for targets and examples through the
// provider (cache-backed); gold labels are never used as affect. Returns one
// Prediction per target, sorted by doc_id.
std::vector<Prediction> run_pipeline(const Split& split, const RetrievalDatabase& db,
                                     const LabelScheme& scheme, const PromptConfig& prompt_config,
                                     const PipelineConfig& config, LlmClient& client,
                                     AffectProvider& provider);

void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path,
                      uint64_t config_hash = 0);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

}  // namespace affectrag

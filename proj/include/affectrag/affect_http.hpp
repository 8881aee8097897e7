#pragma once

#include <memory>

#include "affectrag/affect.hpp"
#include "affectrag/util.hpp"

namespace affectrag {

// HTTP-backed emotion provider. Single endpoint, POST with JSON body
// {"text": <prompted text>, "task": <dimension id>, "mode": "embedding"|"annotation"}.
// Embedding replies carry {"vector": [..]}, annotation replies {"label": ".."}.
// The text field holds the full affect instruction (build_affect_prompt), not
// the raw document. Bearer token read from an environment variable.
struct HttpProviderOptions {
    std::string url;  // e.g. http://host:8080/affect
    uint32_t declared_width = 4096;
    std::string token_env = "AFFECTRAG_PROVIDER_TOKEN";
    int timeout_sec = 120;
    RetryPolicy retry;
};

class HttpAffectProvider : public AffectProvider {
public:
    explicit HttpAffectProvider(HttpProviderOptions options);
    ~HttpAffectProvider() override;

    std::string config_id() const override;
    uint32_t embedding_width() const override { return options_.declared_width; }
    std::vector<float> embed(const std::string& text, const AffectDimension& dim) override;
    AffectValue annotate(const std::string& text, const AffectDimension& dim) override;

private:
    std::string post(const std::string& body);

    HttpProviderOptions options_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace affectrag

#pragma once

#include <atomic>
#include <cstdint>

#include "affectrag/affect.hpp"

namespace affectrag {

// Deterministic offline provider. Embeddings are
// normalize(hash_unit_vector(text) + lambda * class_centroid(class)) where the
// class is read from a marker token ("marker:<k>") planted in the text;
// lambda = 0 yields pure hash noise with no class signal. Labels are derived
// from the planted class, or fixed neutral values in neutral mode.
struct MockProviderOptions {
    uint32_t width = 4096;
    double lambda = 4.0;
    uint64_t seed = 0;
    bool neutral = false;
    std::string class_marker = "marker:";
    // Fault injection: every Nth embed/annotate call throws a non-retryable
    // TransportError (0 disables).
    size_t fail_every = 0;
};

class MockAffectProvider : public AffectProvider {
public:
    explicit MockAffectProvider(MockProviderOptions options = {});

    std::string config_id() const override;
    uint32_t embedding_width() const override { return options_.width; }
    std::vector<float> embed(const std::string& text, const AffectDimension& dim) override;
    AffectValue annotate(const std::string& text, const AffectDimension& dim) override;

    // Planted class parsed from the marker token; -1 when absent.
    int planted_class(const std::string& text) const;

    size_t call_count() const { return calls_.load(); }

private:
    void maybe_fail();
    std::vector<double> class_centroid(int cls) const;

    MockProviderOptions options_;
    std::atomic<size_t> calls_{0};
};

}  // namespace affectrag

#include "affectrag/affect_mock.hpp"

#include <cctype>
#include <cmath>

#include "affectrag/util.hpp"

namespace affectrag {

MockAffectProvider::MockAffectProvider(MockProviderOptions options) : options_(std::move(options)) {
    if (options_.width == 0) throw DataError("mock provider width must be positive");
}

std::string MockAffectProvider::config_id() const {
    return "mock-w" + std::to_string(options_.width) + "-l" + std::to_string(options_.lambda) +
           "-s" + std::to_string(options_.seed) + (options_.neutral ? "-neutral" : "");
}

int MockAffectProvider::planted_class(const std::string& text) const {
    size_t pos = text.find(options_.class_marker);
    if (pos == std::string::npos) return -1;
    pos += options_.class_marker.size();
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) return -1;
    int cls = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        cls = cls * 10 + (text[pos] - '0');
        ++pos;
    }
    return cls;
}

void MockAffectProvider::maybe_fail() {
    size_t n = ++calls_;
    if (options_.fail_every > 0 && n % options_.fail_every == 0) {
        throw TransportError("mock provider injected failure on call " + std::to_string(n),
                             /*retryable=*/false);
    }
}

static std::vector<double> hash_gaussian(uint64_t seed, uint32_t width) {
    std::vector<double> v(width);
    uint64_t state = seed;
    for (auto& x : v) x = gaussian(state);
    return v;
}

static void normalize(std::vector<double>& v) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    double norm = std::sqrt(norm2);
    if (norm == 0.0) {
        v[0] = 1.0;
        return;
    }
    for (double& x : v) x /= norm;
}

std::vector<double> MockAffectProvider::class_centroid(int cls) const {
    // Gram-Schmidt over seeded gaussians so centroids are exactly orthogonal
    // even at small widths.
    std::vector<std::vector<double>> basis;
    for (int c = 0; c <= cls; ++c) {
        auto g = hash_gaussian(options_.seed ^ (0xC3A5C85C97CB3127ULL + static_cast<uint64_t>(c) * 0x9E3779B9ULL),
                               options_.width);
        for (const auto& prev : basis) {
            double dot = 0.0;
            for (size_t i = 0; i < g.size(); ++i) dot += g[i] * prev[i];
            for (size_t i = 0; i < g.size(); ++i) g[i] -= dot * prev[i];
        }
        normalize(g);
        basis.push_back(std::move(g));
    }
    return basis.back();
}

std::vector<float> MockAffectProvider::embed(const std::string& text, const AffectDimension& dim) {
    dim.check();
    if (trim(text).empty()) throw DataError("cannot embed empty text");
    maybe_fail();

    uint64_t seed = fnv1a64(text) ^ fnv1a64(dim.id()) ^ (options_.seed * 0x9E3779B97F4A7C15ULL + 1);
    std::vector<double> v = hash_gaussian(seed, options_.width);
    normalize(v);

    int cls = options_.lambda != 0.0 ? planted_class(text) : -1;
    if (cls >= 0) {
        auto centroid = class_centroid(cls);
        for (size_t i = 0; i < v.size(); ++i) v[i] += options_.lambda * centroid[i];
        normalize(v);
    }

    std::vector<float> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
}

AffectValue MockAffectProvider::annotate(const std::string& text, const AffectDimension& dim) {
    dim.check();
    if (trim(text).empty()) throw DataError("cannot annotate empty text");
    maybe_fail();

    if (options_.neutral) {
        switch (dim.kind) {
            case AffectKind::EIreg: return 0.5;
            case AffectKind::Vreg: return 0.5;
            case AffectKind::EIoc: return 0;
            case AffectKind::Voc: return 3;  // "neutral"
            case AffectKind::Ec: return std::set<std::string>{};
        }
    }

    int cls = planted_class(text);
    bool misinfo = cls > 0;  // class 0 plays the genuine role, higher classes the fabricated one
    uint64_t state = fnv1a64(text) ^ fnv1a64(dim.id()) ^ (options_.seed + 0xA24BAED4963EE407ULL);
    double jitter = (uniform01(state) - 0.5) * 0.1;  // +-0.05

    switch (dim.kind) {
        case AffectKind::EIreg: {
            // Misinformation skews angrier/more fearful/sadder and less joyful.
            double base;
            switch (*dim.emotion) {
                case Emotion::Anger: base = misinfo ? 0.65 : 0.35; break;
                case Emotion::Fear: base = misinfo ? 0.60 : 0.40; break;
                case Emotion::Joy: base = misinfo ? 0.30 : 0.60; break;
                case Emotion::Sadness: base = misinfo ? 0.55 : 0.45; break;
                default: base = 0.5;
            }
            return std::clamp(base + jitter, 0.0, 1.0);
        }
        case AffectKind::Vreg:
            return std::clamp((misinfo ? 0.35 : 0.65) + jitter, 0.0, 1.0);
        case AffectKind::EIoc: {
            bool high_side = (*dim.emotion == Emotion::Joy) ? !misinfo : misinfo;
            int v = high_side ? (uniform01(state) < 0.5 ? 2 : 3) : (uniform01(state) < 0.5 ? 0 : 1);
            return v;
        }
        case AffectKind::Voc:
            return misinfo ? (uniform01(state) < 0.5 ? 1 : 2) : (uniform01(state) < 0.5 ? 4 : 5);
        case AffectKind::Ec: {
            std::set<std::string> out;
            if (misinfo) {
                out.insert("anger");
                out.insert("fear");
                if (uniform01(state) < 0.3) out.insert("pessimism");
            } else {
                out.insert("joy");
                if (uniform01(state) < 0.3) out.insert("optimism");
            }
            return out;
        }
    }
    throw DataError("unhandled dimension");
}

}  // namespace affectrag

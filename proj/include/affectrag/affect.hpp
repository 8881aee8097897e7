#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "affectrag/corpus.hpp"

namespace affectrag {

enum class AffectKind { EIreg, EIoc, Vreg, Voc, Ec };
enum class Emotion { Anger, Fear, Joy, Sadness };

inline constexpr std::array<Emotion, 4> kEmotions = {Emotion::Anger, Emotion::Fear,
                                                     Emotion::Joy, Emotion::Sadness};

// The 11-emotion vocabulary of the Ec task; the empty set means
// "neutral or no emotion".
inline constexpr std::array<std::string_view, 11> kEcEmotions = {
    "anger", "anticipation", "disgust", "fear",     "joy",      "love",
    "optimism", "pessimism", "sadness", "surprise", "trust"};

inline constexpr std::array<std::string_view, 4> kEIocClassNames = {"no", "low", "moderate", "high"};

inline constexpr std::array<std::string_view, 7> kVocClassNames = {
    "very negative", "moderately negative", "slightly negative", "neutral",
    "slightly positive", "moderately positive", "very positive"};

std::string emotion_name(Emotion e);  // lowercase: "anger"
std::optional<Emotion> parse_emotion(std::string_view name);

// One of the 11 concrete affective dimensions: EIreg and EIoc carry an
// emotion, Vreg/Voc/Ec do not.
struct AffectDimension {
    AffectKind kind = AffectKind::Vreg;
    std::optional<Emotion> emotion;

    static AffectDimension vreg() { return {AffectKind::Vreg, std::nullopt}; }
    static AffectDimension voc() { return {AffectKind::Voc, std::nullopt}; }
    static AffectDimension ec() { return {AffectKind::Ec, std::nullopt}; }
    static AffectDimension eireg(Emotion e) { return {AffectKind::EIreg, e}; }
    static AffectDimension eioc(Emotion e) { return {AffectKind::EIoc, e}; }

    static std::vector<AffectDimension> all();  // the 11 dimensions
    // Identifier form used in CLI flags and file names: "vreg", "eireg-anger", ...
    std::string id() const;
    static std::optional<AffectDimension> parse(std::string_view id);

    void check() const;  // emotion present exactly when kind is EIreg/EIoc

    auto operator<=>(const AffectDimension&) const = default;
};

// A single dimension's decoded label: real for EIreg/Vreg, ordinal for
// EIoc (0..3) / Voc (0..6), emotion name set for Ec.
using AffectValue = std::variant<double, int, std::set<std::string>>;

void check_affect_value(const AffectDimension& dim, const AffectValue& value);

// The five explicit affect annotations of one document. Fields are optional
// so partially annotated documents are representable; check() validates
// whatever is present.
struct ExplicitAffect {
    std::map<Emotion, double> eireg;  // intensity in [0,1]
    std::map<Emotion, int> eioc;      // 0 no / 1 low / 2 moderate / 3 high
    std::optional<double> vreg;       // [0,1], 0 most negative
    std::optional<int> voc;           // 0..6, very negative .. very positive
    std::optional<std::set<std::string>> ec;

    void set(const AffectDimension& dim, const AffectValue& value);
    bool has(const AffectDimension& dim) const;
    AffectValue get(const AffectDimension& dim) const;  // throws DataError when absent
    void check() const;
};

struct EmbeddingRecord {
    std::string doc_id;
    AffectDimension dimension;
    std::vector<float> vector;

    size_t width() const { return vector.size(); }
    void check() const;  // finite entries, non-zero norm
};

// Instruction text sent to the emotion provider for one dimension. Wordings
// are configuration, not part of the provider wire contract.
std::string build_affect_prompt(const AffectDimension& dim, const std::string& text);

// Provider contract: a source of implicit embeddings and explicit labels.
// Implementations must be deterministic for a fixed configuration.
class AffectProvider {
public:
    virtual ~AffectProvider() = default;
    // Configuration identity; part of cache keys.
    virtual std::string config_id() const = 0;
    virtual uint32_t embedding_width() const = 0;
    virtual std::vector<float> embed(const std::string& text, const AffectDimension& dim) = 0;
    virtual AffectValue annotate(const std::string& text, const AffectDimension& dim) = 0;
};

// Parses a provider's annotation reply string into a typed value, enforcing
// the dimension's range. Throws DataError with the raw reply preserved.
AffectValue parse_annotation_reply(const AffectDimension& dim, const std::string& raw);

}  // namespace affectrag

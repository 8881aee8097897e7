#include "affectrag/affect.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "affectrag/util.hpp"

namespace affectrag {

std::string emotion_name(Emotion e) {
    switch (e) {
        case Emotion::Anger: return "anger";
        case Emotion::Fear: return "fear";
        case Emotion::Joy: return "joy";
        case Emotion::Sadness: return "sadness";
    }
    return "anger";
}

std::optional<Emotion> parse_emotion(std::string_view s) {
    for (Emotion e : kEmotions) {
        if (s == emotion_name(e)) return e;
    }
    return std::nullopt;
}

std::vector<AffectDimension> AffectDimension::all() {
    std::vector<AffectDimension> dims;
    for (Emotion e : kEmotions) dims.push_back(eireg(e));
    for (Emotion e : kEmotions) dims.push_back(eioc(e));
    dims.push_back(vreg());
    dims.push_back(voc());
    dims.push_back(ec());
    return dims;
}

std::string AffectDimension::id() const {
    switch (kind) {
        case AffectKind::Vreg: return "vreg";
        case AffectKind::Voc: return "voc";
        case AffectKind::Ec: return "ec";
        case AffectKind::EIreg: return "eireg-" + emotion_name(*emotion);
        case AffectKind::EIoc: return "eioc-" + emotion_name(*emotion);
    }
    return "vreg";
}

std::optional<AffectDimension> AffectDimension::parse(std::string_view id) {
    std::string s = lowercase(trim(id));
    if (s == "vreg") return vreg();
    if (s == "voc") return voc();
    if (s == "ec") return ec();
    if (s.rfind("eireg-", 0) == 0) {
        if (auto e = parse_emotion(s.substr(6))) return eireg(*e);
        return std::nullopt;
    }
    if (s.rfind("eioc-", 0) == 0) {
        if (auto e = parse_emotion(s.substr(5))) return eioc(*e);
        return std::nullopt;
    }
    return std::nullopt;
}

void AffectDimension::check() const {
    bool needs_emotion = kind == AffectKind::EIreg || kind == AffectKind::EIoc;
    if (needs_emotion != emotion.has_value()) {
        throw DataError("affect dimension: emotion must be present exactly for EIreg/EIoc");
    }
}

void check_affect_value(const AffectDimension& dim, const AffectValue& value) {
    dim.check();
    switch (dim.kind) {
        case AffectKind::EIreg:
        case AffectKind::Vreg: {
            const double* v = std::get_if<double>(&value);
            if (!v) throw DataError(dim.id() + ": expected a real value");
            if (!std::isfinite(*v) || *v < 0.0 || *v > 1.0)
                throw DataError(dim.id() + ": value outside [0,1]");
            break;
        }
        case AffectKind::EIoc: {
            const int* v = std::get_if<int>(&value);
            if (!v) throw DataError(dim.id() + ": expected an ordinal value");
            if (*v < 0 || *v > 3) throw DataError(dim.id() + ": ordinal outside 0..3");
            break;
        }
        case AffectKind::Voc: {
            const int* v = std::get_if<int>(&value);
            if (!v) throw DataError(dim.id() + ": expected an ordinal value");
            if (*v < 0 || *v > 6) throw DataError(dim.id() + ": ordinal outside 0..6");
            break;
        }
        case AffectKind::Ec: {
            const auto* v = std::get_if<std::set<std::string>>(&value);
            if (!v) throw DataError(dim.id() + ": expected an emotion set");
            for (const auto& name : *v) {
                if (std::find(kEcEmotions.begin(), kEcEmotions.end(), name) == kEcEmotions.end())
                    throw DataError(dim.id() + ": '" + name + "' not in the 11-emotion vocabulary");
            }
            break;
        }
    }
}

void ExplicitAffect::set(const AffectDimension& dim, const AffectValue& value) {
    check_affect_value(dim, value);
    switch (dim.kind) {
        case AffectKind::EIreg: eireg[*dim.emotion] = std::get<double>(value); break;
        case AffectKind::EIoc: eioc[*dim.emotion] = std::get<int>(value); break;
        case AffectKind::Vreg: vreg = std::get<double>(value); break;
        case AffectKind::Voc: voc = std::get<int>(value); break;
        case AffectKind::Ec: ec = std::get<std::set<std::string>>(value); break;
    }
}

bool ExplicitAffect::has(const AffectDimension& dim) const {
    switch (dim.kind) {
        case AffectKind::EIreg: return eireg.count(*dim.emotion) > 0;
        case AffectKind::EIoc: return eioc.count(*dim.emotion) > 0;
        case AffectKind::Vreg: return vreg.has_value();
        case AffectKind::Voc: return voc.has_value();
        case AffectKind::Ec: return ec.has_value();
    }
    return false;
}

AffectValue ExplicitAffect::get(const AffectDimension& dim) const {
    if (!has(dim)) throw DataError("missing affect value for dimension " + dim.id());
    switch (dim.kind) {
        case AffectKind::EIreg: return eireg.at(*dim.emotion);
        case AffectKind::EIoc: return eioc.at(*dim.emotion);
        case AffectKind::Vreg: return *vreg;
        case AffectKind::Voc: return *voc;
        case AffectKind::Ec: return *ec;
    }
    throw DataError("unreachable");
}

void ExplicitAffect::check() const {
    for (const auto& [e, v] : eireg) check_affect_value(AffectDimension::eireg(e), v);
    for (const auto& [e, v] : eioc) check_affect_value(AffectDimension::eioc(e), v);
    if (vreg) check_affect_value(AffectDimension::vreg(), *vreg);
    if (voc) check_affect_value(AffectDimension::voc(), *voc);
    if (ec) check_affect_value(AffectDimension::ec(), *ec);
}

void EmbeddingRecord::check() const {
    if (vector.empty()) throw DataError("embedding for " + doc_id + " is empty");
    double norm2 = 0.0;
    for (float v : vector) {
        if (!std::isfinite(v)) throw DataError("embedding for " + doc_id + " contains non-finite values");
        norm2 += static_cast<double>(v) * v;
    }
    if (norm2 == 0.0) throw DataError("embedding for " + doc_id + " has zero norm");
}

std::string build_affect_prompt(const AffectDimension& dim, const std::string& text) {
    dim.check();
    if (trim(text).empty()) throw DataError("cannot build an affect prompt for empty text");
    std::ostringstream out;
    out << "Task: ";
    switch (dim.kind) {
        case AffectKind::EIreg:
            out << "Assign a score between 0 and 1 to represent the intensity of "
                << emotion_name(*dim.emotion) << " expressed in the text.";
            break;
        case AffectKind::EIoc:
            out << "Classify the intensity of " << emotion_name(*dim.emotion)
                << " in the text as no, low, moderate, or high.";
            break;
        case AffectKind::Vreg:
            out << "Assign a score between 0 (most negative) and 1 (most positive) to represent "
                   "the sentiment intensity of the text.";
            break;
        case AffectKind::Voc:
            out << "Classify the sentiment of the text into one of seven ordinal classes: "
                   "very negative, moderately negative, slightly negative, neutral, "
                   "slightly positive, moderately positive, or very positive.";
            break;
        case AffectKind::Ec:
            out << "Identify which of the following emotions are expressed in the text: "
                   "anger, anticipation, disgust, fear, joy, love, optimism, pessimism, "
                   "sadness, surprise, trust. Answer 'neutral or no emotion' if none apply.";
            break;
    }
    out << "\nText: " << text << "\nAnswer:";
    return out.str();
}

// Finds the first real-number token in a reply.
static std::optional<double> first_number(const std::string& s) {
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        bool start = std::isdigit(static_cast<unsigned char>(c)) ||
                     ((c == '-' || c == '+') && i + 1 < s.size() &&
                      std::isdigit(static_cast<unsigned char>(s[i + 1])));
        if (!start) continue;
        try {
            return std::stod(s.substr(i));
        } catch (const std::exception&) {
            continue;
        }
    }
    return std::nullopt;
}

static bool contains_word(const std::string& haystack_lower, const std::string& word) {
    size_t pos = 0;
    while ((pos = haystack_lower.find(word, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack_lower[pos - 1]));
        size_t end = pos + word.size();
        bool right_ok = end >= haystack_lower.size() ||
                        !std::isalnum(static_cast<unsigned char>(haystack_lower[end]));
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

AffectValue parse_annotation_reply(const AffectDimension& dim, const std::string& raw) {
    auto fail = [&](const std::string& why) -> DataError {
        return DataError(dim.id() + ": " + why + " (raw reply: \"" + raw + "\")");
    };
    std::string low = lowercase(raw);
    switch (dim.kind) {
        case AffectKind::EIreg:
        case AffectKind::Vreg: {
            auto v = first_number(raw);
            if (!v) throw fail("no numeric value in reply");
            if (*v < 0.0 || *v > 1.0) throw fail("value " + std::to_string(*v) + " outside [0,1]");
            AffectValue value = *v;
            check_affect_value(dim, value);
            return value;
        }
        case AffectKind::EIoc: {
            for (int i = static_cast<int>(kEIocClassNames.size()) - 1; i >= 0; --i) {
                if (contains_word(low, std::string(kEIocClassNames[static_cast<size_t>(i)]))) {
                    return AffectValue{i};
                }
            }
            if (auto v = first_number(raw)) {
                int i = static_cast<int>(*v);
                if (*v == i && i >= 0 && i <= 3) return AffectValue{i};
                throw fail("ordinal outside 0..3");
            }
            throw fail("no intensity class in reply");
        }
        case AffectKind::Voc: {
            // No class name is a substring of another, so index order is safe.
            for (int i = 0; i < static_cast<int>(kVocClassNames.size()); ++i) {
                if (low.find(kVocClassNames[static_cast<size_t>(i)]) != std::string::npos)
                    return AffectValue{i};
            }
            if (auto v = first_number(raw)) {
                int i = static_cast<int>(*v);
                if (*v == i && i >= 0 && i <= 6) return AffectValue{i};
                throw fail("ordinal outside 0..6");
            }
            if (contains_word(low, "neutral")) return AffectValue{3};
            throw fail("no sentiment class in reply");
        }
        case AffectKind::Ec: {
            if (low.find("neutral or no emotion") != std::string::npos || trim(low) == "neutral")
                return AffectValue{std::set<std::string>{}};
            std::set<std::string> found;
            for (std::string_view name : kEcEmotions) {
                if (contains_word(low, std::string(name))) found.insert(std::string(name));
            }
            if (found.empty()) throw fail("no recognizable emotions in reply");
            return AffectValue{std::move(found)};
        }
    }
    throw fail("unhandled dimension");
}

}  // namespace affectrag

#include "affectrag/synthetic.hpp"

#include <sstream>

#include "affectrag/util.hpp"

namespace affectrag {

static std::string pseudo_word(uint64_t& state) {
    static const char* consonants = "bcdfghklmnprstvz";
    static const char* vowels = "aeiou";
    size_t syllables = 2 + splitmix64(state) % 3;
    std::string w;
    for (size_t s = 0; s < syllables; ++s) {
        w += consonants[splitmix64(state) % 16];
        w += vowels[splitmix64(state) % 5];
    }
    return w;
}

CorpusStore make_synthetic_corpus(const SyntheticSpec& spec) {
    if (spec.n_docs == 0 || spec.n_domains == 0 || spec.n_classes == 0)
        throw DataError("synthetic corpus: all sizes must be positive");

    LabelScheme scheme;
    scheme.dataset = Dataset::Custom;
    for (size_t c = 0; c < spec.n_classes; ++c) {
        std::string name = c == 0 ? "genuine" : "fabricated";
        if (c > 1) name += std::to_string(c);
        scheme.classes.emplace_back(static_cast<int>(c), std::move(name));
    }

    std::vector<Document> docs;
    docs.reserve(spec.n_docs);
    for (size_t i = 0; i < spec.n_docs; ++i) {
        size_t domain = i % spec.n_domains;
        size_t cls = (i / spec.n_domains) % spec.n_classes;
        uint64_t state = spec.seed * 0x9E3779B97F4A7C15ULL + i;
        std::ostringstream text;
        size_t words = 6 + splitmix64(state) % 6;
        for (size_t w = 0; w < words; ++w) {
            if (w > 0) text << " ";
            text << pseudo_word(state);
        }
        text << " marker:" << cls;
        Document d;
        d.id = "syn-" + std::to_string(i);
        d.text = text.str();
        d.domain = "domain-" + std::to_string(domain);
        d.label = static_cast<int>(cls);
        docs.push_back(std::move(d));
    }
    return CorpusStore(std::move(docs), Dataset::Custom, std::move(scheme));
}

}  // namespace affectrag

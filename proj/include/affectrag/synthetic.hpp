#pragma once

#include "affectrag/corpus.hpp"

namespace affectrag {

// Seeded synthetic corpus for offline pipeline runs, sweeps and benches.
// Texts are pseudo-word sentences carrying a "marker:<class>" token that the
// mock provider reads as the planted class; labels equal the planted class.
// Documents rotate through domains and classes, so per-domain label counts
// stay balanced up to rounding.
struct SyntheticSpec {
    size_t n_docs = 500;
    size_t n_domains = 4;
    size_t n_classes = 2;
    uint64_t seed = 7;
};

CorpusStore make_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace affectrag

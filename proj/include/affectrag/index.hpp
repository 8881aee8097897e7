#pragma once

#include <filesystem>
#include <map>
#include <unordered_map>

#include "affectrag/affect.hpp"
#include "affectrag/affect_cache.hpp"
#include "affectrag/matrix.hpp"
#include "affectrag/reduce.hpp"

namespace affectrag {

// Cosine similarity with double accumulation regardless of storage precision,
// so orderings are stable across float32-backed namespaces.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

struct Neighbor {
    std::string doc_id;
    double score;
};

inline constexpr std::array<uint32_t, 6> kSupportedWidths = {3, 8, 16, 128, 512, 4096};

enum class SplitRole : uint8_t { Source = 0, Target = 1 };

// One (dimension, width) vector store: doc ids, split roles and a contiguous
// row-major float32 matrix.
struct IndexNamespace {
    uint32_t width = 0;
    std::vector<std::string> ids;
    std::vector<SplitRole> roles;
    MatrixF vectors;

    size_t row_of(const std::string& doc_id) const;  // throws DataError when absent
    std::vector<std::string> ids_with_role(SplitRole role) const;
    void rebuild_lookup();

private:
    std::unordered_map<std::string, size_t> lookup_;
};

struct NamespaceKey {
    AffectDimension dimension;
    uint32_t width = 0;
    auto operator<=>(const NamespaceKey&) const = default;
};

class RetrievalDatabase {
public:
    RetrievalDatabase() = default;
    explicit RetrievalDatabase(Dataset dataset) : dataset_(dataset) {}

    Dataset dataset() const { return dataset_; }

    void add_namespace(const AffectDimension& dim, uint32_t width, std::vector<std::string> ids,
                       std::vector<SplitRole> roles, MatrixF vectors);

    bool has_namespace(const AffectDimension& dim, uint32_t width) const;
    const IndexNamespace& ns(const AffectDimension& dim, uint32_t width) const;
    const std::map<NamespaceKey, IndexNamespace>& namespaces() const { return namespaces_; }

    std::span<const float> vector_of(const AffectDimension& dim, uint32_t width,
                                     const std::string& doc_id) const;

    // Thresholded cosine top-k over the given candidate ids. Scores strictly
    // above threshold, sorted descending with ties broken by doc_id ascending;
    // fewer than k results only when fewer candidates pass.
    std::vector<Neighbor> query(const AffectDimension& dim, uint32_t width,
                                std::span<const float> query_vector, size_t k, double threshold,
                                const std::vector<std::string>& candidates) const;

    void save(const std::filesystem::path& path, uint64_t config_hash = 0) const;
    static RetrievalDatabase load(const std::filesystem::path& path, uint64_t* config_hash = nullptr);

private:
    Dataset dataset_ = Dataset::Custom;
    std::map<NamespaceKey, IndexNamespace> namespaces_;
};

struct BuildOptions {
    std::filesystem::path cache_dir;
    size_t max_inflight = 4;
    double failure_ceiling = 0.01;
    bool force = false;
};

// Builds one namespace per (dimension, width): source rows first, then target
// rows, both tagged by role. Non-identity widths project through the supplied
// per-dimension PCA model; a width equal to the provider's raw width is stored
// as-is. Widths must come from kSupportedWidths or equal the provider width.
RetrievalDatabase build_database(const Split& split, Dataset dataset, AffectProvider& provider,
                                 const std::vector<AffectDimension>& dimensions,
                                 const std::vector<uint32_t>& widths,
                                 const std::map<AffectDimension, PcaModel>& pca_models,
                                 const BuildOptions& options = {});

// Fits one PCA model per dimension on the split's source+target embeddings
// (or source only), wide enough for max(widths restricted below raw width).
std::map<AffectDimension, PcaModel> fit_split_pca(const Split& split, Dataset dataset,
                                                  AffectProvider& provider,
                                                  const std::vector<AffectDimension>& dimensions,
                                                  const std::vector<uint32_t>& widths,
                                                  const BuildOptions& options = {},
                                                  bool fit_source_only = false);

// Top-k source-domain neighbors for every target document.
std::map<std::string, std::vector<Neighbor>> retrieve_for_split(const RetrievalDatabase& db,
                                                                const Split& split,
                                                                const AffectDimension& dim,
                                                                uint32_t width, size_t k,
                                                                double threshold);

// Same, driven purely by the roles stored in the database (for loaded files).
std::map<std::string, std::vector<Neighbor>> retrieve_all(const RetrievalDatabase& db,
                                                          const AffectDimension& dim,
                                                          uint32_t width, size_t k,
                                                          double threshold);

struct BenchResult {
    uint32_t width = 0;
    double mean_ms = 0;
    double p95_ms = 0;
    size_t queries = 0;
};

// Mean/p95 wall time per query (monotonic clock) against the namespace's
// source rows, cycling target vectors as queries after warm-up.
BenchResult bench_retrieval(const RetrievalDatabase& db, const AffectDimension& dim, uint32_t width,
                            size_t k, double threshold, size_t queries = 1000, size_t warmup = 100);

}  // namespace affectrag

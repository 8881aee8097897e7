#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>

#include "affectrag/affect.hpp"
#include "affectrag/matrix.hpp"

namespace affectrag {

// Per-(dataset, dimension) embedding cache. Binary file: magic, format
// version, config hash, declared width, then appended records of
// doc_id + width + raw little-endian float32s. Appends are immediately
// flushed so an interrupted run resumes where it stopped; duplicate doc_ids
// resolve last-write-wins on load.
class EmbeddingCache {
public:
    EmbeddingCache(const std::filesystem::path& dir, Dataset dataset, const AffectDimension& dim,
                   uint32_t width, uint64_t config_hash, bool force = false);

    std::optional<std::vector<float>> get(const std::string& doc_id) const;
    void put(const std::string& doc_id, std::span<const float> vector);
    size_t size() const;

    const std::filesystem::path& file_path() const { return path_; }

    static std::filesystem::path location(const std::filesystem::path& dir, Dataset dataset,
                                          const AffectDimension& dim);

private:
    void load_existing(bool force);

    std::filesystem::path path_;
    uint32_t width_;
    uint64_t config_hash_;
    mutable std::mutex mu_;
    std::map<std::string, std::vector<float>> entries_;
};

// Per-(dataset, dimension) annotation cache: JSON lines, first line a header
// of {format_version, config_hash}, then {doc_id, value} records.
class AnnotationCache {
public:
    AnnotationCache(const std::filesystem::path& dir, Dataset dataset, const AffectDimension& dim,
                    uint64_t config_hash, bool force = false);

    std::optional<AffectValue> get(const std::string& doc_id) const;
    void put(const std::string& doc_id, const AffectValue& value);
    size_t size() const;

private:
    std::filesystem::path path_;
    AffectDimension dim_;
    uint64_t config_hash_;
    mutable std::mutex mu_;
    std::map<std::string, AffectValue> entries_;
};

struct AnnotateOptions {
    std::filesystem::path cache_dir;  // empty = no persistence
    double failure_ceiling = 0.01;    // abort when failed fraction exceeds this
    size_t max_inflight = 4;
    bool force = false;               // accept caches with a different config hash
};

struct AnnotateResult {
    std::map<std::string, ExplicitAffect> affect;
    std::vector<std::pair<std::string, std::string>> failures;  // (doc_id, reason)
    size_t provider_calls = 0;
};

// Annotates every document on every requested dimension through the provider,
// resuming from the cache. Per-document failures are collected; the run only
// fails when their fraction exceeds the ceiling.
AnnotateResult annotate_corpus(const CorpusStore& corpus, AffectProvider& provider,
                               const std::vector<AffectDimension>& dimensions,
                               const AnnotateOptions& options = {});

struct EmbedResult {
    // Rows aligned with corpus.documents() order.
    std::map<AffectDimension, MatrixF> embeddings;
    std::vector<std::pair<std::string, std::string>> failures;
    size_t provider_calls = 0;
};

EmbedResult embed_corpus(const CorpusStore& corpus, AffectProvider& provider,
                         const std::vector<AffectDimension>& dimensions,
                         const AnnotateOptions& options = {});

// Serialization of AffectValue / ExplicitAffect as JSON (annotation cache,
// CLI artifacts).
std::string affect_value_to_json(const AffectValue& value);
AffectValue affect_value_from_json(const AffectDimension& dim, const std::string& json_text);

void save_annotations(const std::map<std::string, ExplicitAffect>& affect,
                      const std::filesystem::path& path, uint64_t config_hash);
std::map<std::string, ExplicitAffect> load_annotations(const std::filesystem::path& path);

}  // namespace affectrag

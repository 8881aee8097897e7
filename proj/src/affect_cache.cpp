#include "affectrag/affect_cache.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>

#include "affectrag/util.hpp"
#include "json.hpp"

namespace affectrag {

using nlohmann::json;

static constexpr std::string_view kEmbMagic = "ARGEMB01";
static constexpr uint32_t kEmbVersion = 1;

std::filesystem::path EmbeddingCache::location(const std::filesystem::path& dir, Dataset dataset,
                                               const AffectDimension& dim) {
    return dir / ("emb_" + dataset_name(dataset) + "_" + dim.id() + ".bin");
}

EmbeddingCache::EmbeddingCache(const std::filesystem::path& dir, Dataset dataset,
                               const AffectDimension& dim, uint32_t width, uint64_t config_hash,
                               bool force)
    : path_(dir.empty() ? std::filesystem::path{} : location(dir, dataset, dim)),
      width_(width),
      config_hash_(config_hash) {
    if (path_.empty()) return;
    std::filesystem::create_directories(dir);
    load_existing(force);
}

void EmbeddingCache::load_existing(bool force) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        // Fresh cache: write the header now so appends are self-describing.
        std::ofstream out(path_, std::ios::binary);
        if (!out) throw DataError("cannot create embedding cache: " + path_.string());
        out.write(kEmbMagic.data(), static_cast<std::streamsize>(kEmbMagic.size()));
        write_u32(out, kEmbVersion);
        write_u64(out, config_hash_);
        write_u32(out, width_);
        return;
    }
    expect_magic(in, kEmbMagic, "embedding cache");
    uint32_t version = read_u32(in);
    if (version != kEmbVersion)
        throw DataError(path_.string() + ": unsupported cache version " + std::to_string(version));
    uint64_t stored_hash = read_u64(in);
    if (stored_hash != config_hash_ && !force) {
        throw DataError(path_.string() + ": cache was built under a different provider config (" +
                        hex64(stored_hash) + " vs " + hex64(config_hash_) +
                        "); rerun with --force to reuse it");
    }
    uint32_t stored_width = read_u32(in);
    if (stored_width != width_)
        throw DataError(path_.string() + ": cache width " + std::to_string(stored_width) +
                        " does not match provider width " + std::to_string(width_));
    while (in.peek() != EOF) {
        std::streampos record_start = in.tellg();
        try {
            std::string id = read_string(in);
            uint32_t w = read_u32(in);
            if (w != width_)
                throw DataError(path_.string() + ": corrupt record width for id " + id);
            std::vector<float> v(w);
            read_f32_array(in, v);
            entries_[id] = std::move(v);  // last write wins
        } catch (const DataError&) {
            // A record torn by an interrupted append can only sit at the tail;
            // drop it so the rerun regenerates that document.
            if (in.eof()) {
                in.clear();
                in.seekg(0, std::ios::end);
                std::streamoff tail = in.tellg() - record_start;
                std::cerr << "warning: " << path_.string() << ": dropping " << tail
                          << " torn trailing bytes from an interrupted run\n";
                std::filesystem::resize_file(path_, static_cast<uintmax_t>(record_start));
                break;
            }
            throw;
        }
    }
}

std::optional<std::vector<float>> EmbeddingCache::get(const std::string& doc_id) const {
    std::lock_guard<std::mutex> g(mu_);
    auto it = entries_.find(doc_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const std::string& doc_id, std::span<const float> vector) {
    if (vector.size() != width_)
        throw DataError("embedding cache: width mismatch for " + doc_id);
    std::lock_guard<std::mutex> g(mu_);
    entries_[doc_id] = std::vector<float>(vector.begin(), vector.end());
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to embedding cache: " + path_.string());
    write_string(out, doc_id);
    write_u32(out, width_);
    write_f32_array(out, vector);
    out.flush();
}

size_t EmbeddingCache::size() const {
    std::lock_guard<std::mutex> g(mu_);
    return entries_.size();
}

// --- annotation cache -------------------------------------------------------

std::string affect_value_to_json(const AffectValue& value) {
    json j;
    if (const double* d = std::get_if<double>(&value)) {
        j = *d;
    } else if (const int* i = std::get_if<int>(&value)) {
        j = *i;
    } else {
        j = json::array();
        for (const auto& name : std::get<std::set<std::string>>(value)) j.push_back(name);
    }
    return j.dump();
}

static AffectValue affect_value_from_parsed(const AffectDimension& dim, const json& j) {
    AffectValue value;
    switch (dim.kind) {
        case AffectKind::EIreg:
        case AffectKind::Vreg:
            value = j.get<double>();
            break;
        case AffectKind::EIoc:
        case AffectKind::Voc:
            value = j.get<int>();
            break;
        case AffectKind::Ec: {
            std::set<std::string> s;
            for (const auto& x : j) s.insert(x.get<std::string>());
            value = std::move(s);
            break;
        }
    }
    check_affect_value(dim, value);
    return value;
}

AffectValue affect_value_from_json(const AffectDimension& dim, const std::string& json_text) {
    try {
        return affect_value_from_parsed(dim, json::parse(json_text));
    } catch (const json::exception& e) {
        throw DataError("bad affect value for " + dim.id() + ": " + e.what());
    }
}

AnnotationCache::AnnotationCache(const std::filesystem::path& dir, Dataset dataset,
                                 const AffectDimension& dim, uint64_t config_hash, bool force)
    : dim_(dim), config_hash_(config_hash) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    path_ = dir / ("ann_" + dataset_name(dataset) + "_" + dim.id() + ".jsonl");
    std::ifstream in(path_);
    if (!in) {
        std::ofstream out(path_);
        if (!out) throw DataError("cannot create annotation cache: " + path_.string());
        out << json{{"format_version", 1}, {"config_hash", hex64(config_hash_)}}.dump() << "\n";
        return;
    }
    std::string line;
    bool header_seen = false;
    for (;;) {
        std::streampos line_start = in.tellg();
        if (!std::getline(in, line)) break;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            std::string rest;
            bool more_content = false;
            while (std::getline(in, rest)) {
                if (!trim(rest).empty()) {
                    more_content = true;
                    break;
                }
            }
            if (more_content)
                throw DataError(path_.string() + ": corrupt cache line: " + e.what());
            // torn final line from an interrupted append; drop and resume
            std::cerr << "warning: " << path_.string()
                      << ": dropping a torn trailing line from an interrupted run\n";
            in.close();
            std::filesystem::resize_file(path_, static_cast<uintmax_t>(line_start));
            break;
        }
        if (!header_seen) {
            header_seen = true;
            if (!j.contains("format_version"))
                throw DataError(path_.string() + ": missing cache header");
            if (j.value("config_hash", "") != hex64(config_hash_) && !force) {
                throw DataError(path_.string() +
                                ": cache was built under a different provider config; "
                                "rerun with --force to reuse it");
            }
            continue;
        }
        entries_[j.at("doc_id").get<std::string>()] =
            affect_value_from_parsed(dim_, j.at("value"));
    }
    if (!header_seen) {
        // even the header was torn away; start the file over
        std::ofstream out(path_, std::ios::trunc);
        if (!out) throw DataError("cannot rewrite annotation cache: " + path_.string());
        out << json{{"format_version", 1}, {"config_hash", hex64(config_hash_)}}.dump() << "\n";
    }
}

std::optional<AffectValue> AnnotationCache::get(const std::string& doc_id) const {
    std::lock_guard<std::mutex> g(mu_);
    auto it = entries_.find(doc_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void AnnotationCache::put(const std::string& doc_id, const AffectValue& value) {
    check_affect_value(dim_, value);
    std::lock_guard<std::mutex> g(mu_);
    entries_[doc_id] = value;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError("cannot append to annotation cache: " + path_.string());
    out << json{{"doc_id", doc_id}, {"value", json::parse(affect_value_to_json(value))}}.dump()
        << "\n";
    out.flush();
}

size_t AnnotationCache::size() const {
    std::lock_guard<std::mutex> g(mu_);
    return entries_.size();
}

// --- corpus-wide driving ------------------------------------------------------

namespace {

// Failure collection with an early-abort latch: once more failures have
// accumulated than the ceiling allows over the whole run, workers stop
// issuing provider calls instead of grinding through a doomed corpus.
struct FailureLog {
    std::mutex mu;
    std::vector<std::pair<std::string, std::string>> failures;
    size_t allowed = SIZE_MAX;
    std::atomic<bool> doomed{false};

    void add(const std::string& id, const std::string& why) {
        std::lock_guard<std::mutex> g(mu);
        failures.emplace_back(id, why);
        if (failures.size() > allowed) doomed = true;
    }
};

void enforce_ceiling(const FailureLog& log, size_t total, double ceiling) {
    if (total == 0) return;
    double rate = static_cast<double>(log.failures.size()) / static_cast<double>(total);
    if (rate > ceiling || log.doomed) {
        std::string first = log.failures.empty() ? "" : log.failures.front().second;
        throw TransportError("annotation failure rate " + std::to_string(rate) +
                                 " exceeds ceiling " + std::to_string(ceiling) +
                                 " (first failure: " + first + ")",
                             /*retryable=*/false);
    }
}

}  // namespace

AnnotateResult annotate_corpus(const CorpusStore& corpus, AffectProvider& provider,
                               const std::vector<AffectDimension>& dimensions,
                               const AnnotateOptions& options) {
    if (dimensions.empty()) throw DataError("annotate_corpus: no dimensions requested");
    AnnotateResult result;
    std::atomic<size_t> calls{0};
    FailureLog log;
    log.allowed = static_cast<size_t>(options.failure_ceiling *
                                      static_cast<double>(corpus.size() * dimensions.size()));
    std::mutex result_mu;

    uint64_t cfg = fnv1a64(provider.config_id());
    for (const auto& dim : dimensions) {
        AnnotationCache cache(options.cache_dir, corpus.dataset(), dim, cfg, options.force);
        const auto& docs = corpus.documents();
        parallel_for(docs.size(), options.max_inflight, [&](size_t i) {
            if (log.doomed) return;
            const Document& doc = docs[i];
            std::optional<AffectValue> value = cache.get(doc.id);
            if (!value) {
                try {
                    ++calls;
                    value = provider.annotate(doc.text, dim);
                    cache.put(doc.id, *value);
                } catch (const std::exception& e) {
                    log.add(doc.id, dim.id() + std::string(": ") + e.what());
                    return;
                }
            }
            std::lock_guard<std::mutex> g(result_mu);
            result.affect[doc.id].set(dim, *value);
        });
    }

    enforce_ceiling(log, corpus.size() * dimensions.size(), options.failure_ceiling);
    result.failures = std::move(log.failures);
    result.provider_calls = calls.load();
    return result;
}

EmbedResult embed_corpus(const CorpusStore& corpus, AffectProvider& provider,
                         const std::vector<AffectDimension>& dimensions,
                         const AnnotateOptions& options) {
    if (dimensions.empty()) throw DataError("embed_corpus: no dimensions requested");
    EmbedResult result;
    std::atomic<size_t> calls{0};
    FailureLog log;
    log.allowed = static_cast<size_t>(options.failure_ceiling *
                                      static_cast<double>(corpus.size() * dimensions.size()));

    uint64_t cfg = fnv1a64(provider.config_id());
    uint32_t width = provider.embedding_width();
    for (const auto& dim : dimensions) {
        EmbeddingCache cache(options.cache_dir, corpus.dataset(), dim, width, cfg, options.force);
        const auto& docs = corpus.documents();
        MatrixF rows(docs.size(), width);
        parallel_for(docs.size(), options.max_inflight, [&](size_t i) {
            if (log.doomed) return;
            const Document& doc = docs[i];
            std::optional<std::vector<float>> v = cache.get(doc.id);
            if (!v) {
                try {
                    ++calls;
                    v = provider.embed(doc.text, dim);
                    if (v->size() != width)
                        throw DataError("provider returned width " + std::to_string(v->size()) +
                                        ", expected " + std::to_string(width));
                    cache.put(doc.id, *v);
                } catch (const std::exception& e) {
                    log.add(doc.id, dim.id() + std::string(": ") + e.what());
                    return;
                }
            }
            std::copy(v->begin(), v->end(), rows.row(i).begin());
        });
        result.embeddings.emplace(dim, std::move(rows));
    }

    enforce_ceiling(log, corpus.size() * dimensions.size(), options.failure_ceiling);
    result.failures = std::move(log.failures);
    result.provider_calls = calls.load();
    return result;
}

// --- annotation artifact files ------------------------------------------------

void save_annotations(const std::map<std::string, ExplicitAffect>& affect,
                      const std::filesystem::path& path, uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write annotations: " + path.string());
    out << json{{"format_version", 1}, {"config_hash", hex64(config_hash)}}.dump() << "\n";
    for (const auto& [doc_id, ea] : affect) {
        json j{{"doc_id", doc_id}};
        for (const auto& [e, v] : ea.eireg) j["eireg"][emotion_name(e)] = v;
        for (const auto& [e, v] : ea.eioc) j["eioc"][emotion_name(e)] = v;
        if (ea.vreg) j["vreg"] = *ea.vreg;
        if (ea.voc) j["voc"] = *ea.voc;
        if (ea.ec) {
            j["ec"] = json::array();
            for (const auto& name : *ea.ec) j["ec"].push_back(name);
        }
        out << j.dump() << "\n";
    }
}

std::map<std::string, ExplicitAffect> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotations: " + path.string());
    std::map<std::string, ExplicitAffect> affect;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("doc_id")) continue;  // header line
        auto emotion_or_throw = [&](const std::string& name) {
            auto e = parse_emotion(name);
            if (!e) throw DataError(path.string() + ":" + std::to_string(lineno) +
                                    ": unknown emotion '" + name + "'");
            return *e;
        };
        ExplicitAffect ea;
        if (j.contains("eireg")) {
            for (auto& [name, v] : j["eireg"].items())
                ea.set(AffectDimension::eireg(emotion_or_throw(name)), v.get<double>());
        }
        if (j.contains("eioc")) {
            for (auto& [name, v] : j["eioc"].items())
                ea.set(AffectDimension::eioc(emotion_or_throw(name)), v.get<int>());
        }
        if (j.contains("vreg")) ea.set(AffectDimension::vreg(), j["vreg"].get<double>());
        if (j.contains("voc")) ea.set(AffectDimension::voc(), j["voc"].get<int>());
        if (j.contains("ec")) {
            std::set<std::string> s;
            for (const auto& x : j["ec"]) s.insert(x.get<std::string>());
            ea.set(AffectDimension::ec(), std::move(s));
        }
        affect[j["doc_id"].get<std::string>()] = std::move(ea);
    }
    return affect;
}

}  // namespace affectrag

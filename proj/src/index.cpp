#include "affectrag/index.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "affectrag/util.hpp"

namespace affectrag {

template <typename T>
static double cosine_impl(std::span<const T> a, std::span<const T> b) {
    if (a.size() != b.size())
        throw DataError("cosine: width mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
    if (a.empty()) throw DataError("cosine: empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double x = static_cast<double>(a[i]);
        double y = static_cast<double>(b[i]);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) throw DataError("cosine: zero-norm input");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

size_t IndexNamespace::row_of(const std::string& doc_id) const {
    auto it = lookup_.find(doc_id);
    if (it == lookup_.end()) throw DataError("doc id not in namespace: " + doc_id);
    return it->second;
}

std::vector<std::string> IndexNamespace::ids_with_role(SplitRole role) const {
    std::vector<std::string> out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (roles[i] == role) out.push_back(ids[i]);
    }
    return out;
}

void IndexNamespace::rebuild_lookup() {
    lookup_.clear();
    lookup_.reserve(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (!lookup_.emplace(ids[i], i).second)
            throw DataError("duplicate doc id in namespace: " + ids[i]);
    }
}

void RetrievalDatabase::add_namespace(const AffectDimension& dim, uint32_t width,
                                      std::vector<std::string> ids, std::vector<SplitRole> roles,
                                      MatrixF vectors) {
    dim.check();
    if (ids.size() != vectors.rows || roles.size() != ids.size())
        throw DataError("namespace: ids/roles/rows size mismatch");
    if (vectors.cols != width) throw DataError("namespace: matrix width mismatch");
    for (size_t r = 0; r < vectors.rows; ++r) {
        double norm2 = 0.0;
        for (float v : vectors.row(r)) {
            if (!std::isfinite(v)) throw DataError("namespace: non-finite vector for " + ids[r]);
            norm2 += static_cast<double>(v) * v;
        }
        if (norm2 == 0.0) throw DataError("namespace: zero-norm vector for " + ids[r]);
    }
    IndexNamespace ns;
    ns.width = width;
    ns.ids = std::move(ids);
    ns.roles = std::move(roles);
    ns.vectors = std::move(vectors);
    ns.rebuild_lookup();
    namespaces_[NamespaceKey{dim, width}] = std::move(ns);
}

bool RetrievalDatabase::has_namespace(const AffectDimension& dim, uint32_t width) const {
    return namespaces_.count(NamespaceKey{dim, width}) > 0;
}

const IndexNamespace& RetrievalDatabase::ns(const AffectDimension& dim, uint32_t width) const {
    auto it = namespaces_.find(NamespaceKey{dim, width});
    if (it == namespaces_.end())
        throw DataError("missing namespace (" + dim.id() + ", " + std::to_string(width) +
                        "); build the index with this dimension and width first");
    return it->second;
}

std::span<const float> RetrievalDatabase::vector_of(const AffectDimension& dim, uint32_t width,
                                                    const std::string& doc_id) const {
    const IndexNamespace& n = ns(dim, width);
    return n.vectors.row(n.row_of(doc_id));
}

std::vector<Neighbor> RetrievalDatabase::query(const AffectDimension& dim, uint32_t width,
                                               std::span<const float> query_vector, size_t k,
                                               double threshold,
                                               const std::vector<std::string>& candidates) const {
    const IndexNamespace& n = ns(dim, width);
    if (query_vector.size() != width)
        throw DataError("query width " + std::to_string(query_vector.size()) +
                        " does not match namespace width " + std::to_string(width));

    std::vector<Neighbor> scored;
    scored.reserve(candidates.size());
    for (const auto& id : candidates) {
        double score = cosine(query_vector, n.vectors.row(n.row_of(id)));
        if (score > threshold) scored.push_back({id, score});
    }
    auto better = [](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    };
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<ptrdiff_t>(k), scored.end(),
                          better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    return scored;
}

// --- build ---------------------------------------------------------------

static bool width_allowed(uint32_t width, uint32_t provider_width) {
    return width == provider_width ||
           std::find(kSupportedWidths.begin(), kSupportedWidths.end(), width) !=
               kSupportedWidths.end();
}

static CorpusStore split_corpus(const Split& split, Dataset dataset) {
    // Source rows first, then target, so rebuilt databases are bit-identical.
    std::vector<Document> docs = split.source;
    docs.insert(docs.end(), split.target.begin(), split.target.end());
    LabelScheme scheme;
    scheme.dataset = dataset;
    return CorpusStore(std::move(docs), dataset, std::move(scheme));
}

std::map<AffectDimension, PcaModel> fit_split_pca(const Split& split, Dataset dataset,
                                                  AffectProvider& provider,
                                                  const std::vector<AffectDimension>& dimensions,
                                                  const std::vector<uint32_t>& widths,
                                                  const BuildOptions& options,
                                                  bool fit_source_only) {
    uint32_t raw = provider.embedding_width();
    uint32_t max_reduced = 0;
    for (uint32_t w : widths) {
        if (w < raw) max_reduced = std::max(max_reduced, w);
    }
    std::map<AffectDimension, PcaModel> models;
    if (max_reduced == 0) return models;

    CorpusStore all = split_corpus(split, dataset);
    AnnotateOptions aopt{options.cache_dir, options.failure_ceiling, options.max_inflight,
                         options.force};
    EmbedResult embedded = embed_corpus(all, provider, dimensions, aopt);
    size_t fit_rows = fit_source_only ? split.source.size() : all.size();
    for (const auto& dim : dimensions) {
        const MatrixF& rows = embedded.embeddings.at(dim);
        MatrixD data(fit_rows, rows.cols);
        for (size_t r = 0; r < fit_rows; ++r) {
            for (size_t c = 0; c < rows.cols; ++c) data.at(r, c) = rows.at(r, c);
        }
        models.emplace(dim, fit_pca(data, max_reduced));
    }
    return models;
}

RetrievalDatabase build_database(const Split& split, Dataset dataset, AffectProvider& provider,
                                 const std::vector<AffectDimension>& dimensions,
                                 const std::vector<uint32_t>& widths,
                                 const std::map<AffectDimension, PcaModel>& pca_models,
                                 const BuildOptions& options) {
    if (dimensions.empty() || widths.empty())
        throw DataError("build_database: dimensions and widths must be non-empty");
    uint32_t raw = provider.embedding_width();
    for (uint32_t w : widths) {
        if (!width_allowed(w, raw))
            throw DataError("width " + std::to_string(w) +
                            " is not in the supported set and is not the provider's raw width");
    }

    CorpusStore all = split_corpus(split, dataset);
    AnnotateOptions aopt{options.cache_dir, options.failure_ceiling, options.max_inflight,
                         options.force};
    EmbedResult embedded = embed_corpus(all, provider, dimensions, aopt);
    if (!embedded.failures.empty()) {
        // Index rows must be complete: a database with holes would silently
        // shrink the retrieval pool.
        throw DataError("build_database: " + std::to_string(embedded.failures.size()) +
                        " documents failed to embed (first: " + embedded.failures.front().second +
                        ")");
    }

    std::vector<std::string> ids;
    std::vector<SplitRole> roles;
    ids.reserve(all.size());
    for (size_t i = 0; i < split.source.size(); ++i) {
        ids.push_back(split.source[i].id);
        roles.push_back(SplitRole::Source);
    }
    for (size_t i = 0; i < split.target.size(); ++i) {
        ids.push_back(split.target[i].id);
        roles.push_back(SplitRole::Target);
    }

    RetrievalDatabase db(dataset);
    for (const auto& dim : dimensions) {
        const MatrixF& raw_rows = embedded.embeddings.at(dim);
        for (uint32_t w : widths) {
            MatrixF rows;
            if (w == raw) {
                rows = raw_rows;
            } else {
                auto it = pca_models.find(dim);
                if (it == pca_models.end())
                    throw DataError("no pca model for dimension " + dim.id() +
                                    "; fit one before building reduced widths");
                if (it->second.k < w)
                    throw DataError("pca model for " + dim.id() + " has k=" +
                                    std::to_string(it->second.k) + " < width " + std::to_string(w));
                PcaModel sliced = it->second;
                if (sliced.k > w) {
                    sliced.k = w;
                    sliced.components.rows = w;
                    sliced.components.data.resize(w * sliced.input_width);
                    sliced.explained_variance.resize(w);
                }
                rows = sliced.transform(raw_rows);
            }
            db.add_namespace(dim, w, ids, roles, std::move(rows));
        }
    }
    return db;
}

std::map<std::string, std::vector<Neighbor>> retrieve_for_split(const RetrievalDatabase& db,
                                                                const Split& split,
                                                                const AffectDimension& dim,
                                                                uint32_t width, size_t k,
                                                                double threshold) {
    const IndexNamespace& n = db.ns(dim, width);
    std::vector<std::string> source_ids = n.ids_with_role(SplitRole::Source);
    std::map<std::string, std::vector<Neighbor>> out;
    for (const auto& doc : split.target) {
        std::span<const float> qv = n.vectors.row(n.row_of(doc.id));
        out[doc.id] = db.query(dim, width, qv, k, threshold, source_ids);
    }
    return out;
}

std::map<std::string, std::vector<Neighbor>> retrieve_all(const RetrievalDatabase& db,
                                                          const AffectDimension& dim,
                                                          uint32_t width, size_t k,
                                                          double threshold) {
    const IndexNamespace& n = db.ns(dim, width);
    std::vector<std::string> source_ids = n.ids_with_role(SplitRole::Source);
    std::map<std::string, std::vector<Neighbor>> out;
    for (size_t i = 0; i < n.ids.size(); ++i) {
        if (n.roles[i] != SplitRole::Target) continue;
        out[n.ids[i]] = db.query(dim, width, n.vectors.row(i), k, threshold, source_ids);
    }
    return out;
}

// --- persistence ------------------------------------------------------------

static constexpr std::string_view kDbMagic = "ARGIDX01";
static constexpr uint32_t kDbVersion = 1;

static uint8_t dim_kind_code(AffectKind k) { return static_cast<uint8_t>(k); }
static uint8_t emotion_code(const std::optional<Emotion>& e) {
    return e ? static_cast<uint8_t>(*e) : 0xFF;
}

void RetrievalDatabase::save(const std::filesystem::path& path, uint64_t config_hash) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write database: " + path.string());
    out.write(kDbMagic.data(), static_cast<std::streamsize>(kDbMagic.size()));
    write_u32(out, kDbVersion);
    write_u64(out, config_hash);
    write_string(out, dataset_name(dataset_));
    write_u32(out, static_cast<uint32_t>(namespaces_.size()));

    // Directory with offsets patched after the payloads are written.
    std::vector<std::streampos> offset_slots;
    for (const auto& [key, ns] : namespaces_) {
        write_u8(out, dim_kind_code(key.dimension.kind));
        write_u8(out, emotion_code(key.dimension.emotion));
        write_u32(out, key.width);
        write_u64(out, ns.ids.size());
        offset_slots.push_back(out.tellp());
        write_u64(out, 0);
    }
    size_t i = 0;
    for (const auto& [key, ns] : namespaces_) {
        std::streampos payload_at = out.tellp();
        for (size_t r = 0; r < ns.ids.size(); ++r) {
            write_string(out, ns.ids[r]);
            write_u8(out, static_cast<uint8_t>(ns.roles[r]));
        }
        write_f32_array(out, ns.vectors.data);
        std::streampos end = out.tellp();
        out.seekp(offset_slots[i++]);
        write_u64(out, static_cast<uint64_t>(payload_at));
        out.seekp(end);
    }
}

RetrievalDatabase RetrievalDatabase::load(const std::filesystem::path& path,
                                          uint64_t* config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open database: " + path.string());
    expect_magic(in, kDbMagic, "retrieval database");
    uint32_t version = read_u32(in);
    if (version != kDbVersion) throw DataError(path.string() + ": unsupported database version");
    uint64_t hash = read_u64(in);
    if (config_hash) *config_hash = hash;
    auto dataset = parse_dataset(read_string(in));
    if (!dataset) throw DataError(path.string() + ": unknown dataset tag");
    RetrievalDatabase db(*dataset);

    struct DirEntry {
        AffectDimension dim;
        uint32_t width;
        uint64_t rows;
        uint64_t offset;
    };
    uint32_t count = read_u32(in);
    std::vector<DirEntry> dir;
    dir.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        DirEntry e;
        e.dim.kind = static_cast<AffectKind>(read_u8(in));
        uint8_t emo = read_u8(in);
        e.dim.emotion = emo == 0xFF ? std::nullopt : std::optional<Emotion>(static_cast<Emotion>(emo));
        e.width = read_u32(in);
        e.rows = read_u64(in);
        e.offset = read_u64(in);
        dir.push_back(std::move(e));
    }
    for (const auto& e : dir) {
        in.seekg(static_cast<std::streamoff>(e.offset));
        std::vector<std::string> ids;
        std::vector<SplitRole> roles;
        ids.reserve(e.rows);
        roles.reserve(e.rows);
        for (uint64_t r = 0; r < e.rows; ++r) {
            ids.push_back(read_string(in));
            roles.push_back(static_cast<SplitRole>(read_u8(in)));
        }
        MatrixF vectors(e.rows, e.width);
        read_f32_array(in, vectors.data);
        db.add_namespace(e.dim, e.width, std::move(ids), std::move(roles), std::move(vectors));
    }
    return db;
}

// --- bench -----------------------------------------------------------------

BenchResult bench_retrieval(const RetrievalDatabase& db, const AffectDimension& dim, uint32_t width,
                            size_t k, double threshold, size_t queries, size_t warmup) {
    const IndexNamespace& n = db.ns(dim, width);
    std::vector<std::string> source_ids = n.ids_with_role(SplitRole::Source);
    std::vector<size_t> target_rows;
    for (size_t i = 0; i < n.ids.size(); ++i) {
        if (n.roles[i] == SplitRole::Target) target_rows.push_back(i);
    }
    if (target_rows.empty() || source_ids.empty())
        throw DataError("bench: namespace needs both target and source rows");

    volatile double sink = 0;  // keep the optimizer honest
    auto run_one = [&](size_t qi) {
        auto qv = n.vectors.row(target_rows[qi % target_rows.size()]);
        auto result = db.query(dim, width, qv, k, threshold, source_ids);
        if (!result.empty()) sink = sink + result.front().score;
    };
    for (size_t i = 0; i < warmup; ++i) run_one(i);

    std::vector<double> times_ms(queries);
    for (size_t i = 0; i < queries; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        run_one(i);
        auto t1 = std::chrono::steady_clock::now();
        times_ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    double total = 0;
    for (double t : times_ms) total += t;
    std::sort(times_ms.begin(), times_ms.end());
    BenchResult r;
    r.width = width;
    r.queries = queries;
    r.mean_ms = total / static_cast<double>(queries);
    r.p95_ms = times_ms[static_cast<size_t>(static_cast<double>(queries - 1) * 0.95)];
    return r;
}

}  // namespace affectrag

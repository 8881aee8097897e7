#include "affectrag/index.hpp"

#include <algorithm>
#include <cmath>

#include "affectrag/affect_mock.hpp"
#include "affectrag/synthetic.hpp"
#include "affectrag/util.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace affectrag;
using testutil::TempDir;

namespace {

// Exhaustive-scan oracle, written independently of the query path: compute
// every cosine left to right, filter, stable-sort.
std::vector<Neighbor> oracle_query(const IndexNamespace& ns, std::span<const float> qv, size_t k,
                                   double threshold, const std::vector<std::string>& candidates) {
    std::vector<Neighbor> all;
    for (const auto& id : candidates) {
        size_t row = ns.row_of(id);
        double dot = 0, na = 0, nb = 0;
        for (size_t c = 0; c < ns.width; ++c) {
            double x = qv[c], y = ns.vectors.at(row, c);
            dot += x * y;
            na += x * x;
            nb += y * y;
        }
        double score = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
        if (score > threshold) all.push_back({id, score});
    }
    std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

MatrixF random_unit_rows(size_t rows, uint32_t width, uint64_t seed, size_t duplicate_every = 0) {
    MatrixF m(rows, width);
    uint64_t state = seed;
    for (size_t r = 0; r < rows; ++r) {
        if (duplicate_every > 0 && r > 0 && r % duplicate_every == 0) {
            // exact duplicates produce exact score ties
            std::copy(m.row(r - 1).begin(), m.row(r - 1).end(), m.row(r).begin());
            continue;
        }
        double norm2 = 0;
        std::vector<double> v(width);
        for (auto& x : v) {
            x = gaussian(state);
            norm2 += x * x;
        }
        double norm = std::sqrt(norm2);
        for (size_t c = 0; c < width; ++c) m.at(r, c) = static_cast<float>(v[c] / norm);
    }
    return m;
}

RetrievalDatabase make_db(const MatrixF& rows, const AffectDimension& dim, size_t n_targets) {
    std::vector<std::string> ids;
    std::vector<SplitRole> roles;
    for (size_t r = 0; r < rows.rows; ++r) {
        ids.push_back("d" + std::to_string(r));
        roles.push_back(r < rows.rows - n_targets ? SplitRole::Source : SplitRole::Target);
    }
    RetrievalDatabase db(Dataset::Custom);
    db.add_namespace(dim, rows.cols, ids, roles, rows);
    return db;
}

}  // namespace

TEST_CASE("cosine basics") {
    std::vector<float> a{1, 0}, b{0, 1}, c{1, 2}, d{2, 1};
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(0.0));
    CHECK(cosine(c, d) == doctest::Approx(0.8));

    std::vector<float> zero{0, 0}, wide{1, 2, 3};
    CHECK_THROWS_AS(cosine(a, zero), DataError);
    CHECK_THROWS_AS(cosine(std::span<const float>(a), std::span<const float>(wide)), DataError);
}

TEST_CASE("query returns thresholded top-k in score order") {
    AffectDimension dim = AffectDimension::vreg();
    MatrixF rows(3, 2);
    rows.at(0, 0) = 1;  rows.at(0, 1) = 0;    // A
    rows.at(1, 0) = 0.6f; rows.at(1, 1) = 0.8f;  // B
    rows.at(2, 0) = -1; rows.at(2, 1) = 0;   // C
    RetrievalDatabase db(Dataset::Custom);
    db.add_namespace(dim, 2, {"A", "B", "C"}, {SplitRole::Source, SplitRole::Source, SplitRole::Source},
                     rows);

    std::vector<float> q{1, 0};
    auto result = db.query(dim, 2, q, 2, 0.2, {"A", "B", "C"});
    REQUIRE(result.size() == 2);
    CHECK(result[0].doc_id == "A");
    CHECK(result[0].score == doctest::Approx(1.0));
    CHECK(result[1].doc_id == "B");
    CHECK(result[1].score == doctest::Approx(0.6));

    SUBCASE("query equal to a stored vector ranks it first at 1.0") {
        std::vector<float> qb{0.6f, 0.8f};
        auto r = db.query(dim, 2, qb, 1, 0.2, {"A", "B", "C"});
        REQUIRE(r.size() == 1);
        CHECK(r[0].doc_id == "B");
        CHECK(r[0].score == doctest::Approx(1.0));
    }

    SUBCASE("all scores under the threshold give an empty result") {
        std::vector<float> qc{-1, 0};
        CHECK(db.query(dim, 2, qc, 3, 0.2, {"A", "B"}).empty());
    }

    SUBCASE("threshold 1.0 excludes everything, even identical vectors") {
        CHECK(db.query(dim, 2, q, 3, 1.0, {"A", "B", "C"}).empty());
    }

    SUBCASE("unknown candidate and missing namespace error") {
        CHECK_THROWS_AS(db.query(dim, 2, q, 2, 0.2, {"A", "Z"}), DataError);
        CHECK_THROWS_AS(db.query(dim, 4, q, 2, 0.2, {"A"}), DataError);
        CHECK_THROWS_AS(db.query(AffectDimension::ec(), 2, q, 2, 0.2, {"A"}), DataError);
    }
}

TEST_CASE("query equals the exhaustive oracle on randomized instances") {
    AffectDimension dim = AffectDimension::vreg();
    uint64_t seed = 99;
    for (int instance = 0; instance < 30; ++instance) {
        uint32_t width = std::array<uint32_t, 3>{3, 16, 128}[instance % 3];
        size_t rows = 20 + (instance * 37) % 400;
        size_t k = std::array<size_t, 5>{4, 8, 16, 32, 64}[instance % 5];
        MatrixF m = random_unit_rows(rows, width, seed + instance, instance % 2 ? 7 : 0);
        RetrievalDatabase db = make_db(m, dim, 1);
        const IndexNamespace& ns = db.ns(dim, width);
        auto candidates = ns.ids_with_role(SplitRole::Source);

        auto qv = m.row(rows - 1);
        auto expected = oracle_query(ns, qv, k, 0.2, candidates);
        auto actual = db.query(dim, width, qv, k, 0.2, candidates);
        REQUIRE(actual.size() == expected.size());
        for (size_t i = 0; i < actual.size(); ++i) {
            CHECK(actual[i].doc_id == expected[i].doc_id);
            CHECK(actual[i].score == expected[i].score);
        }
    }
}

TEST_CASE("k monotonicity: smaller k results prefix larger k results") {
    AffectDimension dim = AffectDimension::vreg();
    MatrixF m = random_unit_rows(200, 16, 4242, 9);
    RetrievalDatabase db = make_db(m, dim, 1);
    auto candidates = db.ns(dim, 16).ids_with_role(SplitRole::Source);
    auto qv = m.row(199);
    auto big = db.query(dim, 16, qv, 64, 0.2, candidates);
    for (size_t k : {4, 8, 16, 32}) {
        auto small = db.query(dim, 16, qv, k, 0.2, candidates);
        REQUIRE(small.size() == std::min(k, big.size()));
        for (size_t i = 0; i < small.size(); ++i) {
            CHECK(small[i].doc_id == big[i].doc_id);
            CHECK(small[i].score == big[i].score);
        }
    }
}

TEST_CASE("build_database stores identity and reduced widths") {
    CorpusStore corpus = make_synthetic_corpus({40, 4, 2, 3});
    Split split = leave_one_domain_out(corpus, "domain-0");
    MockProviderOptions mopt;
    mopt.width = 128;
    mopt.seed = 17;
    MockAffectProvider provider(mopt);
    AffectDimension dim = AffectDimension::vreg();

    SUBCASE("identity width stores raw provider output") {
        RetrievalDatabase db =
            build_database(split, corpus.dataset(), provider, {dim}, {128}, {}, {});
        const auto& ns = db.ns(dim, 128);
        CHECK(ns.ids.size() == 40);
        const Document& doc = split.source.front();
        auto raw = provider.embed(doc.text, dim);
        auto stored = db.vector_of(dim, 128, doc.id);
        CHECK(std::equal(raw.begin(), raw.end(), stored.begin()));
        CHECK(ns.ids_with_role(SplitRole::Target).size() == split.target.size());
        CHECK(ns.ids_with_role(SplitRole::Source).size() == split.source.size());
    }

    SUBCASE("reduced width projects through the pca model") {
        auto models = fit_split_pca(split, corpus.dataset(), provider, {dim}, {16}, {});
        REQUIRE(models.count(dim) == 1);
        RetrievalDatabase db =
            build_database(split, corpus.dataset(), provider, {dim}, {16}, models, {});
        CHECK(db.ns(dim, 16).width == 16);
        CHECK(db.ns(dim, 16).ids.size() == 40);
    }

    SUBCASE("reduced width without a model is an error") {
        CHECK_THROWS_WITH_AS(build_database(split, corpus.dataset(), provider, {dim}, {16}, {}, {}),
                             doctest::Contains("pca model"), DataError);
    }

    SUBCASE("unsupported width is rejected") {
        CHECK_THROWS_AS(build_database(split, corpus.dataset(), provider, {dim}, {77}, {}, {}),
                        DataError);
    }
}

TEST_CASE("a table-shaped corpus builds one namespace with one row per document") {
    TempDir dir;
    auto path = dir.file("amt.jsonl");
    testutil::write_amtcele_shaped(path);
    CorpusStore corpus = load_corpus(path, Dataset::AMTCele);
    Split split = leave_one_domain_out(corpus, "politics");

    MockProviderOptions mopt;
    mopt.width = 64;
    mopt.lambda = 0.0;
    MockAffectProvider provider(mopt);
    AffectDimension dim = AffectDimension::vreg();
    auto models = fit_split_pca(split, corpus.dataset(), provider, {dim}, {16}, {});
    RetrievalDatabase db =
        build_database(split, corpus.dataset(), provider, {dim}, {16}, models, {});

    CHECK(db.namespaces().size() == 1);
    const auto& ns = db.ns(dim, 16);
    CHECK(ns.ids.size() == 980);
    CHECK(ns.width == 16);
    CHECK(ns.ids_with_role(SplitRole::Target).size() == 80);
    CHECK(ns.ids_with_role(SplitRole::Source).size() == 900);
}

TEST_CASE("default mock provider emits the raw 4096-wide vectors") {
    MockAffectProvider provider;
    CHECK(provider.embedding_width() == 4096);
    auto v = provider.embed("some text", AffectDimension::vreg());
    CHECK(v.size() == 4096);
}

TEST_CASE("rebuild from warm caches is bit-identical on disk") {
    TempDir dir;
    CorpusStore corpus = make_synthetic_corpus({30, 3, 2, 5});
    Split split = leave_one_domain_out(corpus, "domain-1");
    MockProviderOptions mopt;
    mopt.width = 64;
    MockAffectProvider provider(mopt);
    AffectDimension dim = AffectDimension::vreg();
    BuildOptions opt;
    opt.cache_dir = dir.path();

    RetrievalDatabase db1 =
        build_database(split, corpus.dataset(), provider, {dim}, {64}, {}, opt);
    db1.save(dir.file("a.bin"), 42);
    RetrievalDatabase db2 =
        build_database(split, corpus.dataset(), provider, {dim}, {64}, {}, opt);
    db2.save(dir.file("b.bin"), 42);

    std::ifstream fa(dir.file("a.bin"), std::ios::binary);
    std::ifstream fb(dir.file("b.bin"), std::ios::binary);
    std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
    CHECK(!ba.empty());
}

TEST_CASE("database persistence round-trips queries exactly") {
    TempDir dir;
    AffectDimension dim = AffectDimension::eireg(Emotion::Fear);
    MatrixF m = random_unit_rows(150, 16, 2024, 11);
    RetrievalDatabase db = make_db(m, dim, 20);
    auto path = dir.file("db.bin");
    db.save(path, 7);

    uint64_t hash = 0;
    RetrievalDatabase loaded = RetrievalDatabase::load(path, &hash);
    CHECK(hash == 7);
    CHECK(loaded.dataset() == Dataset::Custom);

    auto candidates = db.ns(dim, 16).ids_with_role(SplitRole::Source);
    for (size_t t = 130; t < 150; ++t) {
        auto qv = m.row(t);
        auto before = db.query(dim, 16, qv, 8, 0.2, candidates);
        auto after = loaded.query(dim, 16, qv, 8, 0.2, candidates);
        REQUIRE(before.size() == after.size());
        for (size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].doc_id == after[i].doc_id);
            CHECK(before[i].score == after[i].score);
        }
    }
}

TEST_CASE("retrieve_for_split returns same-class neighbors under a strong class signal") {
    CorpusStore corpus = make_synthetic_corpus({120, 4, 2, 21});
    Split split = leave_one_domain_out(corpus, "domain-2");
    MockProviderOptions mopt;
    mopt.width = 64;
    mopt.lambda = 4.0;
    mopt.seed = 21;
    MockAffectProvider provider(mopt);
    AffectDimension dim = AffectDimension::vreg();
    RetrievalDatabase db = build_database(split, corpus.dataset(), provider, {dim}, {64}, {}, {});

    auto neighbors = retrieve_for_split(db, split, dim, 64, 4, 0.2);
    CHECK(neighbors.size() == split.target.size());

    std::set<std::string> target_ids;
    for (const auto& d : split.target) target_ids.insert(d.id);
    size_t same = 0, total = 0;
    for (const auto& doc : split.target) {
        const auto& ns = neighbors.at(doc.id);
        CHECK(ns.size() <= 4);
        for (const auto& n : ns) {
            CHECK(target_ids.count(n.doc_id) == 0);  // never a target-domain doc
            ++total;
            if (corpus.by_id(n.doc_id).label == doc.label) ++same;
        }
    }
    REQUIRE(total > 0);
    CHECK(static_cast<double>(same) / static_cast<double>(total) >= 0.9);
}

TEST_CASE("bench_retrieval reports sane timings") {
    AffectDimension dim = AffectDimension::vreg();
    MatrixF m = random_unit_rows(300, 16, 5);
    RetrievalDatabase db = make_db(m, dim, 50);
    BenchResult r = bench_retrieval(db, dim, 16, 4, 0.2, 50, 5);
    CHECK(r.queries == 50);
    CHECK(r.mean_ms > 0);
    CHECK(r.p95_ms >= r.mean_ms * 0.1);
}

// Acceptance suite: one criterion per run_criterion call, one PASS/FAIL line
// each, non-zero exit when any criterion fails. Every tolerance is pinned in
// code next to its check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "affectrag/affect_cache.hpp"
#include "affectrag/affect_mock.hpp"
#include "affectrag/eval.hpp"
#include "affectrag/index.hpp"
#include "affectrag/infer.hpp"
#include "affectrag/prompt.hpp"
#include "affectrag/reduce.hpp"
#include "affectrag/stats.hpp"
#include "affectrag/synthetic.hpp"
#include "affectrag/util.hpp"
#include "../published_ttest_fixture.hpp"
#include "../test_helpers.hpp"

using namespace affectrag;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure(what);
}

int g_failures = 0;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<void()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string failure;
    try {
        body();
    } catch (const std::exception& e) {
        failure = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failure.empty() && secs > budget_seconds) {
        std::ostringstream over;
        over << "exceeded the runtime budget of " << budget_seconds << "s";
        failure = over.str();
    }
    if (failure.empty()) {
        std::printf("PASS criterion %d: %s (%.2fs)\n", number, name.c_str(), secs);
    } else {
        ++g_failures;
        std::printf("FAIL criterion %d: %s (%.2fs) -- %s\n", number, name.c_str(), secs,
                    failure.c_str());
    }
    std::fflush(stdout);
}

// --- criterion 1: published t-value regression --------------------------------

void criterion_published_ttests() {
    // Checked as specified: welch_t_from_summary against the published t at
    // max(0.2, 5%|t|). When rows miss, the failure message reports the
    // pooled-variance result alongside, since that variant tracks the
    // published table much more closely.
    std::ostringstream misses;
    int missed = 0;
    double worst_pooled_gap = 0;
    for (const auto& row : kPublishedTTestRows) {
        GroupStats a{row.n_a, row.mean_a, row.var_a};
        GroupStats b{row.n_b, row.mean_b, row.var_b};
        TTestResult welch = welch_t_from_summary(a, b);
        require(welch.p >= 0.0 && welch.p <= 1.0, "p out of range");
        TTestResult pooled = pooled_t_from_summary(a, b);
        worst_pooled_gap = std::max(worst_pooled_gap, std::abs(pooled.t - row.t_published));
        double tol = std::max(0.2, 0.05 * std::abs(row.t_published));
        if (std::abs(welch.t - row.t_published) > tol) {
            ++missed;
            misses << " [" << row.dataset << " " << row.dimension << ": welch "
                   << welch.t << " vs published " << row.t_published << " (tol " << tol
                   << "), pooled " << pooled.t << "]";
        }
    }
    if (missed > 0) {
        std::ostringstream what;
        what << missed << "/15 rows outside the welch tolerance:" << misses.str()
             << "; pooled-variance matches all rows within " << worst_pooled_gap
             << ", indicating the published table used the pooled test";
        throw CheckFailure(what.str());
    }
}

// --- criterion 2: retrieval oracle ----------------------------------------------

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
    std::stable_sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.doc_id < y.doc_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

void criterion_retrieval_oracle() {
    AffectDimension dim = AffectDimension::vreg();
    uint64_t state = 0xACCE97ULL;
    const std::array<uint32_t, 3> widths{3, 16, 128};
    const std::array<size_t, 5> ks{4, 8, 16, 32, 64};
    for (int instance = 0; instance < 200; ++instance) {
        uint32_t width = widths[static_cast<size_t>(instance) % widths.size()];
        size_t k = ks[static_cast<size_t>(instance) % ks.size()];
        size_t rows = 10 + splitmix64(state) % 1991;  // N <= 2000

        MatrixF m(rows, width);
        for (size_t r = 0; r < rows; ++r) {
            if (r > 0 && splitmix64(state) % 5 == 0) {
                // exact duplicate rows force score ties and exercise tie order
                size_t src = splitmix64(state) % r;
                std::copy(m.row(src).begin(), m.row(src).end(), m.row(r).begin());
                continue;
            }
            double norm2 = 0;
            std::vector<double> v(width);
            for (auto& x : v) {
                x = gaussian(state);
                norm2 += x * x;
            }
            for (size_t c = 0; c < width; ++c)
                m.at(r, c) = static_cast<float>(v[c] / std::sqrt(norm2));
        }

        std::vector<std::string> ids;
        std::vector<SplitRole> roles(rows, SplitRole::Source);
        for (size_t r = 0; r < rows; ++r) ids.push_back("d" + std::to_string(r));
        RetrievalDatabase db(Dataset::Custom);
        db.add_namespace(dim, width, ids, roles, m);
        const IndexNamespace& ns = db.ns(dim, width);

        size_t query_row = splitmix64(state) % rows;
        auto qv = m.row(query_row);
        auto expected = oracle_query(ns, qv, k, 0.2, ids);
        auto actual = db.query(dim, width, qv, k, 0.2, ids);

        std::ostringstream what;
        what << "instance " << instance << " (N=" << rows << " w=" << width << " k=" << k << ")";
        require(actual.size() == expected.size(), what.str() + ": size mismatch");
        for (size_t i = 0; i < actual.size(); ++i) {
            require(actual[i].doc_id == expected[i].doc_id,
                    what.str() + ": order mismatch at " + std::to_string(i));
            require(actual[i].score == expected[i].score,
                    what.str() + ": score mismatch at " + std::to_string(i));
        }
    }
}

// --- criterion 3: pca property suite ---------------------------------------------

void criterion_pca() {
    // 2-D fixture, eigenvalues by quadratic formula
    const std::vector<std::pair<double, double>> pts = {
        {2.5, 2.4}, {0.5, 0.7}, {2.2, 2.9}, {1.9, 2.2}, {3.1, 3.0},
        {2.3, 2.7}, {2.0, 1.6}, {1.0, 1.1}, {1.5, 1.6}, {1.1, 0.9}};
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= 10;
    my /= 10;
    double sxx = 0, syy = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    sxx /= 9;
    syy /= 9;
    sxy /= 9;
    double disc = std::sqrt((sxx - syy) * (sxx - syy) + 4 * sxy * sxy);
    double hi = (sxx + syy + disc) / 2, lo = (sxx + syy - disc) / 2;

    MatrixD small(10, 2);
    for (size_t i = 0; i < 10; ++i) {
        small.at(i, 0) = pts[i].first;
        small.at(i, 1) = pts[i].second;
    }
    PcaModel fixture = fit_pca(small, 2);
    require(std::abs(fixture.explained_variance[0] - hi) < 1e-6, "2d fixture eigenvalue 1");
    require(std::abs(fixture.explained_variance[1] - lo) < 1e-6, "2d fixture eigenvalue 2");

    // structured random data wide enough for width 512
    const size_t n = 520, d = 600;
    uint64_t state = 31;
    MatrixD data(n, d);
    for (size_t r = 0; r < n; ++r) {
        double t = gaussian(state);
        for (size_t c = 0; c < d; ++c) {
            double base = std::sin(static_cast<double>(c + 1) * 0.01) * t;
            data.at(r, c) = base + 0.3 * gaussian(state);
        }
    }

    double prev_err = 1e300;
    for (size_t k : {3, 8, 16, 128, 512}) {
        PcaModel model = fit_pca(data, k);
        model.check();  // orthonormality within 1e-8, variance ordering
        for (size_t i = 0; i + 1 < model.k; ++i) {
            require(model.explained_variance[i] >= model.explained_variance[i + 1] - 1e-12,
                    "variance not monotone at k=" + std::to_string(k));
        }
        MatrixD back = model.inverse_transform(model.transform(data));
        double err = 0;
        for (size_t i = 0; i < data.data.size(); ++i) {
            err += (back.data[i] - data.data[i]) * (back.data[i] - data.data[i]);
        }
        err = std::sqrt(err / static_cast<double>(data.data.size()));
        require(err <= prev_err + 1e-9, "reconstruction error grew from k to " + std::to_string(k));
        prev_err = err;
    }
}

// --- criterion 4: end-to-end synthetic direction check -----------------------------

struct SyntheticLegResult {
    double accuracy = 0;
    size_t n = 0;
};

SyntheticLegResult run_leg(const CorpusStore& corpus, double lambda,
                           const std::filesystem::path& cache_dir) {
    MockProviderOptions mopt;
    mopt.width = 4096;
    mopt.lambda = lambda;
    mopt.seed = 20240601;
    MockAffectProvider provider(mopt);
    AffectDimension dim = AffectDimension::vreg();
    MajorityVoteLlm llm;

    PromptConfig pc;
    pc.tmpl = Template::T1;
    pc.dataset = Dataset::Custom;
    pc.dimension = dim;
    pc.custom_task_prompt = "Classify the target text as 0. genuine or 1. fabricated.";

    PipelineConfig cfg;
    cfg.dimension = dim;
    cfg.width = 16;
    cfg.k = 4;
    cfg.threshold = 0.2;
    cfg.cache_dir = cache_dir;

    BuildOptions bopt;
    bopt.cache_dir = cache_dir;

    std::vector<std::pair<std::string, std::vector<Prediction>>> per_split;
    for (const auto& domain : corpus.domains()) {
        Split split = leave_one_domain_out(corpus, domain);
        auto models = fit_split_pca(split, corpus.dataset(), provider, {dim}, {16}, bopt);
        RetrievalDatabase db =
            build_database(split, corpus.dataset(), provider, {dim}, {16}, models, bopt);
        per_split.emplace_back(domain,
                               run_pipeline(split, db, corpus.scheme(), pc, cfg, llm, provider));
    }
    PooledReport report = pool_and_report(per_split, corpus.scheme());
    return {report.overall.accuracy, report.overall.n};
}

void criterion_synthetic_end_to_end() {
    testutil::TempDir cache_strong, cache_flat;
    CorpusStore corpus = make_synthetic_corpus({500, 4, 2, 20240601});

    // (a) within-class vs between-class top-4 similarity on the reduced vectors
    {
        MockProviderOptions mopt;
        mopt.width = 4096;
        mopt.lambda = 4.0;
        mopt.seed = 20240601;
        MockAffectProvider provider(mopt);
        AffectDimension dim = AffectDimension::vreg();
        AnnotateOptions aopt;
        aopt.cache_dir = cache_strong.path();
        EmbedResult embedded = embed_corpus(corpus, provider, {dim}, aopt);
        const MatrixF& raw = embedded.embeddings.at(dim);
        PcaModel model = fit_pca(to_double(raw), 16);
        MatrixF reduced = model.transform(raw);

        MatrixF class0, class1;
        const auto& docs = corpus.documents();
        for (size_t i = 0; i < docs.size(); ++i) {
            (docs[i].label == 0 ? class0 : class1).push_row(reduced.row(i));
        }
        auto within = topk_similarity_stats(class1, class1, 4, /*exclude_self=*/true);
        auto between = topk_similarity_stats(class1, class0, 4, false);
        require(within.grand_mean_pooled > between.grand_mean_pooled,
                "within-class top-4 mean does not exceed between-class");
        TTestResult t = similarity_group_ttest(within.pooled, between.pooled);
        require(t.p < 0.01, "similarity group welch p = " + std::to_string(t.p) + " >= 0.01");
    }

    // (b) retrieval quality drives majority-vote accuracy
    SyntheticLegResult strong = run_leg(corpus, 4.0, cache_strong.path());
    require(strong.n == 500, "pooled n != 500");
    require(strong.accuracy >= 0.9, "class-signal accuracy " + std::to_string(strong.accuracy) +
                                        " < 0.9");

    SyntheticLegResult flat = run_leg(corpus, 0.0, cache_flat.path());
    require(std::abs(flat.accuracy - 0.5) <= 0.1,
            "no-signal accuracy " + std::to_string(flat.accuracy) + " not within 0.5 +- 0.1");
    require(strong.accuracy > flat.accuracy, "affect-aware retrieval does not beat affect-free");
}

// --- criterion 5: prompt golden bytes ----------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot open fixture " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void criterion_prompt_golden() {
    const std::string dir = AFFECTRAG_FIXTURE_DIR;
    LabelScheme pheme = LabelScheme::builtin(Dataset::PHEME);
    LabelScheme amt = LabelScheme::builtin(Dataset::AMTCele);

    PromptConfig t1c;
    t1c.dataset = Dataset::PHEME;
    t1c.k = 4;
    std::vector<PromptExample> t1_examples = {
        {"src-17", "Unconfirmed reports say the bridge has been closed", 1, ""},
        {"src-04", "Officials have released the updated casualty figures.", 0, ""},
        {"src-29", "Witnesses describe a loud bang near the market!", 1, ""},
        {"src-11", "The mayor will hold a press conference at noon", 0, ""},
    };
    RenderedPrompt t1 = render_t1(t1c, pheme,
                                  "Breaking: second suspect reportedly seen near the station",
                                  t1_examples);
    require(t1.text == read_file(dir + "/prompt_t1_pheme.txt"), "template 1 bytes differ");

    PromptConfig t2c;
    t2c.dataset = Dataset::PHEME;
    t2c.dimension = AffectDimension::vreg();
    t2c.k = 4;
    std::vector<PromptExample> t2_examples = {
        {"src-17", "Unconfirmed reports say the bridge has been closed", 1,
         "Sentiment intensity: 0.429"},
        {"src-04", "Officials have released the updated casualty figures.", 0,
         "Sentiment intensity: 0.512"},
    };
    RenderedPrompt t2 = render_t2(t2c, pheme,
                                  "Update: further disruption reported on the northern line",
                                  "Sentiment intensity: 0.234", t2_examples);
    require(t2.text == read_file(dir + "/prompt_t2_pheme_vreg.txt"), "template 2 bytes differ");
    require(t2.text.find("Sentiment intensity: 0.234") != std::string::npos,
            "target affect value missing");
    require(t2.text.find("The label of this text: 1. rumours.") != std::string::npos,
            "example label phrase missing");

    PromptConfig zc;
    zc.dataset = Dataset::AMTCele;
    zc.dimension = AffectDimension::vreg();
    zc.k = 4;
    RenderedPrompt z1 = render_t1(zc, amt, "The studio announced a sequel for next spring.", {});
    require(z1.text == read_file(dir + "/prompt_t1_amtcele_zeroshot.txt"),
            "zero-shot template 1 bytes differ");
    RenderedPrompt z2 = render_t2(zc, amt, "The studio announced a sequel for next spring.",
                                  "Sentiment intensity: 0.700", {});
    require(z2.text == read_file(dir + "/prompt_t2_amtcele_zeroshot.txt"),
            "zero-shot template 2 bytes differ");
}

// --- criterion 6: metric oracle ------------------------------------------------------

void criterion_metric_oracle() {
    // hand cases, exact
    LabelScheme s;
    s.dataset = Dataset::Custom;
    s.classes = {{0, "c0"}, {1, "c1"}};
    auto make_pred = [](const std::string& id, int gold, std::optional<int> label) {
        Prediction p;
        p.doc_id = id;
        p.gold = gold;
        p.parsed_label = label;
        return p;
    };
    std::vector<Prediction> hand = {make_pred("a", 0, 0), make_pred("b", 0, 1),
                                    make_pred("c", 1, 1), make_pred("d", 1, 1)};
    EvalReport rh = weighted_metrics(hand, s);
    require(rh.accuracy == 0.75, "hand accuracy != 0.75");
    require(std::abs(rh.f1 - (2.0 / 3.0 + 4.0 / 5.0) / 2.0) < 1e-15, "hand weighted f1");

    std::vector<Prediction> constant = {make_pred("a", 0, 1), make_pred("b", 0, 1),
                                        make_pred("c", 1, 1), make_pred("d", 1, 1)};
    EvalReport rc = weighted_metrics(constant, s);
    require(rc.accuracy == 0.5, "constant accuracy != 0.5");
    require(std::abs(rc.f1 - 1.0 / 3.0) < 1e-15, "constant weighted f1 != 1/3");

    // 100 random confusion matrices against an independent row/column-sum oracle
    uint64_t state = 0x6EA1ULL;
    for (int trial = 0; trial < 100; ++trial) {
        size_t classes = 2 + splitmix64(state) % 4;
        LabelScheme scheme;
        scheme.dataset = Dataset::Custom;
        for (size_t i = 0; i < classes; ++i)
            scheme.classes.emplace_back(static_cast<int>(i), "k" + std::to_string(i));

        Matrix<int64_t> m(classes, classes);
        std::vector<Prediction> preds;
        size_t serial = 0;
        for (size_t g = 0; g < classes; ++g) {
            for (size_t p = 0; p < classes; ++p) {
                int64_t count = static_cast<int64_t>(splitmix64(state) % 9);
                m.at(g, p) = count;
                for (int64_t i = 0; i < count; ++i) {
                    preds.push_back(make_pred("t" + std::to_string(serial++),
                                              static_cast<int>(g), static_cast<int>(p)));
                }
            }
        }
        if (preds.empty()) {
            m.at(0, 0) = 1;
            preds.push_back(make_pred("t0", 0, 0));
        }

        double n = 0, diag = 0, wp = 0, wr = 0, wf = 0;
        for (size_t i = 0; i < classes; ++i) {
            for (size_t j = 0; j < classes; ++j) n += static_cast<double>(m.at(i, j));
            diag += static_cast<double>(m.at(i, i));
        }
        for (size_t i = 0; i < classes; ++i) {
            double row = 0, col = 0;
            for (size_t j = 0; j < classes; ++j) {
                row += static_cast<double>(m.at(i, j));
                col += static_cast<double>(m.at(j, i));
            }
            double tp = static_cast<double>(m.at(i, i));
            double prec = col > 0 ? tp / col : 0;
            double rec = row > 0 ? tp / row : 0;
            double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
            wp += row / n * prec;
            wr += row / n * rec;
            wf += row / n * f1;
        }

        EvalReport got = weighted_metrics(preds, scheme);
        require(std::abs(got.accuracy - diag / n) < 1e-9, "oracle accuracy mismatch");
        require(std::abs(got.precision - wp) < 1e-9, "oracle precision mismatch");
        require(std::abs(got.recall - wr) < 1e-9, "oracle recall mismatch");
        require(std::abs(got.f1 - wf) < 1e-9, "oracle f1 mismatch");
    }
}

// --- criterion 7: persistence round-trips ----------------------------------------------

void criterion_persistence() {
    testutil::TempDir dir;
    CorpusStore corpus = make_synthetic_corpus({60, 3, 2, 4242});
    MockProviderOptions mopt;
    mopt.width = 128;
    mopt.seed = 4242;
    MockAffectProvider provider(mopt);
    AffectDimension dim = AffectDimension::vreg();

    // embedding cache: write, reload, bit-exact vectors
    {
        AnnotateOptions aopt;
        aopt.cache_dir = dir.path();
        EmbedResult first = embed_corpus(corpus, provider, {dim}, aopt);
        EmbedResult second = embed_corpus(corpus, provider, {dim}, aopt);
        require(second.provider_calls == 0, "embedding cache was not warm");
        require(first.embeddings.at(dim).data == second.embeddings.at(dim).data,
                "embedding cache reload not bit-exact");
    }

    // pca model
    Split split = leave_one_domain_out(corpus, "domain-0");
    BuildOptions bopt;
    bopt.cache_dir = dir.path();
    auto models = fit_split_pca(split, corpus.dataset(), provider, {dim}, {16}, bopt);
    {
        auto path = dir.file("model.bin");
        models.at(dim).save(path, 77);
        uint64_t hash = 0;
        PcaModel loaded = PcaModel::load(path, &hash);
        require(hash == 77, "pca config hash lost");
        require(loaded.mean == models.at(dim).mean, "pca mean not bit-exact");
        require(loaded.components.data == models.at(dim).components.data,
                "pca components not bit-exact");
        require(loaded.explained_variance == models.at(dim).explained_variance,
                "pca variance not bit-exact");
    }

    // retrieval database: identical queries before and after reload
    RetrievalDatabase db = build_database(split, corpus.dataset(), provider, {dim}, {16}, models,
                                          bopt);
    {
        auto path = dir.file("db.bin");
        db.save(path, 99);
        uint64_t hash = 0;
        RetrievalDatabase loaded = RetrievalDatabase::load(path, &hash);
        require(hash == 99, "db config hash lost");
        auto before = retrieve_for_split(db, split, dim, 16, 4, 0.2);
        auto after = retrieve_for_split(loaded, split, dim, 16, 4, 0.2);
        require(before.size() == after.size(), "db reload changed target count");
        for (const auto& [id, expected] : before) {
            const auto& got = after.at(id);
            require(got.size() == expected.size(), "db reload changed neighbor count");
            for (size_t i = 0; i < got.size(); ++i) {
                require(got[i].doc_id == expected[i].doc_id && got[i].score == expected[i].score,
                        "db reload changed query results");
            }
        }
    }

    // predictions
    {
        MajorityVoteLlm llm;
        PromptConfig pc;
        pc.tmpl = Template::T1;
        pc.dataset = Dataset::Custom;
        pc.custom_task_prompt = "Classify the target text as 0. genuine or 1. fabricated.";
        PipelineConfig cfg;
        cfg.dimension = dim;
        cfg.width = 16;
        cfg.k = 4;
        auto preds = run_pipeline(split, db, corpus.scheme(), pc, cfg, llm, provider);
        auto path = dir.file("preds.jsonl");
        save_predictions(preds, path, 123);
        auto loaded = load_predictions(path);
        require(loaded.size() == preds.size(), "prediction count changed on reload");
        for (size_t i = 0; i < preds.size(); ++i) {
            require(loaded[i].doc_id == preds[i].doc_id &&
                        loaded[i].raw_output == preds[i].raw_output &&
                        loaded[i].parsed_label == preds[i].parsed_label &&
                        loaded[i].gold == preds[i].gold &&
                        loaded[i].example_ids == preds[i].example_ids &&
                        loaded[i].prompt_hash == preds[i].prompt_hash,
                    "prediction record changed on reload");
        }
    }
}

// --- criterion 8: bench direction ---------------------------------------------------------

void criterion_bench_direction() {
    // Single-class corpus with a strong signal keeps every candidate above
    // the 0.2 threshold at every width (the regime real affect embeddings
    // sit in), so the scored width is the only cost that varies.
    CorpusStore corpus = make_synthetic_corpus({2000, 4, 1, 7});
    Split split = leave_one_domain_out(corpus, "domain-0");
    AffectDimension dim = AffectDimension::vreg();

    double prev = 0;
    for (uint32_t width : {3u, 8u, 16u, 128u, 512u, 4096u}) {
        MockProviderOptions mopt;
        mopt.width = width;
        mopt.lambda = 4.0;
        mopt.seed = 7;
        MockAffectProvider provider(mopt);
        RetrievalDatabase db =
            build_database(split, corpus.dataset(), provider, {dim}, {width}, {}, {});
        // best-of-3 means to suppress scheduler noise
        double mean = 1e300;
        for (int rep = 0; rep < 3; ++rep) {
            BenchResult r = bench_retrieval(db, dim, width, 4, 0.2, /*queries=*/400, /*warmup=*/80);
            mean = std::min(mean, r.mean_ms);
        }
        std::ostringstream what;
        what << "width " << width << " mean " << mean << "ms vs previous " << prev << "ms";
        require(mean >= prev, "latency not monotone: " + what.str());
        prev = mean;
    }
}

}  // namespace

int main() {
    run_criterion(1, "published t-value regression from summary statistics", 1.0,
                  criterion_published_ttests);
    run_criterion(2, "retrieval equals the exhaustive-scan oracle on 200 instances", 60.0,
                  criterion_retrieval_oracle);
    run_criterion(3, "pca property suite", 10.0, criterion_pca);
    run_criterion(4, "end-to-end synthetic retrieval direction check", 120.0,
                  criterion_synthetic_end_to_end);
    run_criterion(5, "prompt rendering matches the golden fixtures", 1.0,
                  criterion_prompt_golden);
    run_criterion(6, "weighted metrics match the independent oracle", 5.0,
                  criterion_metric_oracle);
    run_criterion(7, "artifact persistence round-trips", 10.0, criterion_persistence);
    run_criterion(8, "retrieval latency monotone in width", 60.0, criterion_bench_direction);

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}

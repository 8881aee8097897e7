#include "affectrag/cli.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "affectrag/affect_http.hpp"
#include "affectrag/affect_mock.hpp"
#include "affectrag/eval.hpp"
#include "affectrag/stats.hpp"
#include "affectrag/synthetic.hpp"
#include "json.hpp"

namespace affectrag {

namespace {

// --- shared option bundles ----------------------------------------------------

struct DatasetOpts {
    std::string dataset = "custom";
    std::string label_scheme_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dataset,--scheme", dataset, "Dataset: amtcele|pheme|coco|custom")
            ->default_val(dataset);
        cmd->add_option("--label-scheme", label_scheme_file,
                        "Label scheme JSON ({\"0\": \"name\", ...}); required for custom");
    }

    Dataset parsed() const {
        auto d = parse_dataset(dataset);
        if (!d) throw DataError("unknown dataset '" + dataset + "'");
        return *d;
    }

    LabelScheme scheme() const {
        Dataset d = parsed();
        if (d == Dataset::Custom || !label_scheme_file.empty()) {
            if (label_scheme_file.empty())
                throw DataError("custom dataset requires --label-scheme");
            return LabelScheme::from_file(label_scheme_file);
        }
        return LabelScheme::builtin(d);
    }
};

struct ProviderOpts {
    std::string kind = "mock";
    std::string url;
    uint32_t width = 4096;
    double mock_lambda = 4.0;
    uint64_t mock_seed = 0;
    bool mock_neutral = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--provider", kind, "Emotion provider: mock|http")->default_val(kind);
        cmd->add_option("--provider-url", url, "HTTP provider endpoint url");
        cmd->add_option("--provider-width", width, "Provider embedding width")->default_val(width);
        cmd->add_option("--mock-lambda", mock_lambda, "Mock class-signal strength (0 = none)")
            ->default_val(mock_lambda);
        cmd->add_option("--mock-seed", mock_seed, "Mock provider seed")->default_val(mock_seed);
        cmd->add_flag("--mock-neutral", mock_neutral, "Mock provider neutral annotation mode");
    }

    std::unique_ptr<AffectProvider> make() const {
        if (kind == "mock") {
            MockProviderOptions o;
            o.width = width;
            o.lambda = mock_lambda;
            o.seed = mock_seed;
            o.neutral = mock_neutral;
            return std::make_unique<MockAffectProvider>(o);
        }
        if (kind == "http") {
            if (url.empty()) throw DataError("--provider http requires --provider-url");
            HttpProviderOptions o;
            o.url = url;
            o.declared_width = width;
            return std::make_unique<HttpAffectProvider>(o);
        }
        throw DataError("unknown provider kind '" + kind + "'");
    }
};

struct SplitOpts {
    std::string target_domain;
    std::vector<std::string> target_domains;
    bool all_rotations = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--target-domain", target_domain, "Single target domain (leave-one-out)");
        cmd->add_option("--target-domains", target_domains,
                        "Comma-separated fixed target domain set")
            ->delimiter(',');
        cmd->add_flag("--all-rotations", all_rotations,
                      "Rotate every domain through the target role and pool");
    }

    std::vector<std::pair<std::string, Split>> splits(const CorpusStore& corpus) const {
        std::vector<std::pair<std::string, Split>> out;
        if (all_rotations) {
            for (const auto& domain : corpus.domains()) {
                out.emplace_back(domain, leave_one_domain_out(corpus, domain));
            }
        } else if (!target_domains.empty()) {
            std::set<std::string> set(target_domains.begin(), target_domains.end());
            std::string name;
            for (const auto& d : set) name += (name.empty() ? "" : "+") + d;
            out.emplace_back(name, fixed_target_split(corpus, set));
        } else if (!target_domain.empty()) {
            out.emplace_back(target_domain, leave_one_domain_out(corpus, target_domain));
        } else {
            throw DataError(
                "select targets with --target-domain, --target-domains or --all-rotations");
        }
        return out;
    }
};

struct RetrievalOpts {
    std::string dim = "vreg";
    uint32_t width = 16;
    size_t k = 4;
    double threshold = 0.2;

    void attach(CLI::App* cmd, bool with_width = true) {
        cmd->add_option("--dim", dim, "Affective dimension (vreg, voc, ec, eireg-anger, ...)")
            ->default_val(dim);
        if (with_width)
            cmd->add_option("--width", width, "Vector width: 3|8|16|128|512|4096")
                ->default_val(width);
        cmd->add_option("--k", k, "Examples to retrieve (0 = zero-shot)")->default_val(k);
        cmd->add_option("--threshold", threshold, "Cosine similarity threshold")
            ->default_val(threshold);
    }

    AffectDimension dimension() const {
        auto d = AffectDimension::parse(dim);
        if (!d) throw DataError("unknown affective dimension '" + dim + "'");
        return *d;
    }

    void validate(uint32_t provider_width, bool force) const {
        if (threshold < -1.0 || threshold > 1.0)
            throw DataError("threshold must lie in [-1, 1]");
        bool supported = std::find(kSupportedWidths.begin(), kSupportedWidths.end(), width) !=
                         kSupportedWidths.end();
        if (!supported && width != provider_width && !force)
            throw DataError("width " + std::to_string(width) +
                            " outside the supported set {3,8,16,128,512,4096}; pass --force to "
                            "override");
    }
};

std::vector<AffectDimension> parse_dims(const std::vector<std::string>& ids) {
    std::vector<AffectDimension> dims;
    for (const auto& id : ids) {
        if (id == "all") return AffectDimension::all();
        auto d = AffectDimension::parse(id);
        if (!d) throw DataError("unknown affective dimension '" + id + "'");
        dims.push_back(*d);
    }
    if (dims.empty()) throw DataError("no affective dimensions given");
    return dims;
}

uint64_t config_hash_of(std::initializer_list<std::string> parts) {
    std::string joined;
    for (const auto& p : parts) {
        joined += p;
        joined += '\x1f';
    }
    return fnv1a64(joined);
}

std::string dims_key(const std::vector<AffectDimension>& dims) {
    std::string s;
    for (const auto& d : dims) s += d.id() + ",";
    return s;
}

std::string widths_key(const std::vector<uint32_t>& widths) {
    std::string s;
    for (uint32_t w : widths) s += std::to_string(w) + ",";
    return s;
}

std::filesystem::path pca_model_path(const std::filesystem::path& dir, Dataset dataset,
                                     const AffectDimension& dim) {
    return dir / ("pca_" + dataset_name(dataset) + "_" + dim.id() + ".bin");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

std::unique_ptr<LlmClient> make_llm(const std::string& kind, const std::string& url,
                                    const std::string& model, const std::string& echo_reply) {
    if (kind == "mock-majority") return std::make_unique<MajorityVoteLlm>();
    if (kind == "mock-echo") return std::make_unique<EchoLlm>(echo_reply);
    if (kind == "http") {
        if (url.empty() || model.empty())
            throw DataError("--llm http requires --llm-url and --model");
        HttpLlmOptions o;
        o.base_url = url;
        o.model = model;
        return std::make_unique<HttpLlmClient>(o);
    }
    throw DataError("unknown llm kind '" + kind + "' (mock-majority|mock-echo|http)");
}

// --- subcommand state -----------------------------------------------------------

struct CliState {
    // shared
    std::string corpus_file;
    std::string cache_dir = "cache";
    std::string out;
    std::string out_dir;
    bool force = false;

    DatasetOpts dataset;
    ProviderOpts provider;
    SplitOpts split;
    RetrievalOpts retrieval;

    // ingest
    bool run_validate = false;

    // annotate/embed/reduce/build-index
    std::vector<std::string> dims{"vreg"};
    std::vector<uint32_t> widths{16};
    std::string pca_dir = "models";
    bool fit_source_only = false;

    // retrieve / render / run
    std::string db_file;
    std::string template_name = "t1";
    std::string annotations_file;

    // render / run / sweep
    std::string task_prompt;
    std::string llm_kind = "mock-majority";
    std::string llm_url;
    std::string model;
    std::string echo_reply = "0.";
    bool random_examples = false;
    uint64_t seed = 0;
    std::vector<size_t> k_list{4, 8, 16, 32, 64};

    // stats
    std::string out_prefix = "stats";
    std::string export_3d_file;

    // evaluate
    std::string predictions_file;

    // bench
    size_t synthetic_docs = 0;
    size_t queries = 1000;
    size_t warmup = 100;
};

CorpusStore load_cli_corpus(const CliState& st) {
    if (st.corpus_file.empty()) throw DataError("--corpus is required");
    Dataset d = st.dataset.parsed();
    std::optional<LabelScheme> custom;
    if (d == Dataset::Custom || !st.dataset.label_scheme_file.empty())
        custom = st.dataset.scheme();
    return load_corpus(st.corpus_file, d, custom);
}

// Generic instruction over the scheme's classes for corpora without a
// built-in task prompt ("Classify the target text as 0. a or 1. b.").
std::string generic_task_prompt(const LabelScheme& scheme) {
    std::string prompt = "Classify the target text as";
    for (const auto& [label, name] : scheme.classes) {
        prompt += (label == 0 ? " " : " or ") + std::to_string(label) + ". " + name;
    }
    return prompt + ".";
}

std::optional<std::string> task_prompt_override(const CliState& st, const CorpusStore& corpus) {
    if (!st.task_prompt.empty()) return st.task_prompt;
    if (corpus.dataset() == Dataset::Custom) return generic_task_prompt(corpus.scheme());
    return std::nullopt;
}

Template parse_template(const std::string& name) {
    std::string n = lowercase(trim(name));
    if (n == "t1") return Template::T1;
    if (n == "t2") return Template::T2;
    throw DataError("unknown template '" + name + "' (t1|t2)");
}

// --- subcommand bodies -----------------------------------------------------------

int cmd_ingest(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    out << "loaded " << corpus.size() << " documents from " << st.corpus_file << "\n";
    auto tallies = corpus.domain_label_counts();
    out << "domains: " << tallies.size() << "\n";
    for (const auto& [domain, counts] : tallies) {
        out << "  " << domain << ":";
        for (const auto& [label, n] : counts)
            out << " " << corpus.scheme().name_of(label) << "=" << n;
        out << "\n";
    }
    ValidationReport report = validate_corpus(corpus);
    out << report.to_string();
    if (!st.out.empty()) {
        save_corpus(corpus, st.out);
        out << "wrote normalized corpus to " << st.out << "\n";
    }
    return 0;
}

int cmd_annotate(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    auto provider = st.provider.make();
    auto dims = parse_dims(st.dims);
    AnnotateOptions opt;
    opt.cache_dir = st.cache_dir;
    opt.force = st.force;
    AnnotateResult result = annotate_corpus(corpus, *provider, dims, opt);
    out << "annotated " << result.affect.size() << " documents on " << dims.size()
        << " dimensions (" << result.provider_calls << " provider calls, "
        << result.failures.size() << " failures)\n";
    for (const auto& [id, why] : result.failures) out << "  failed " << id << ": " << why << "\n";
    if (!st.out.empty()) {
        save_annotations(result.affect, st.out,
                         config_hash_of({provider->config_id(), dims_key(dims)}));
        out << "wrote annotations to " << st.out << "\n";
    }
    return 0;
}

int cmd_embed(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    auto provider = st.provider.make();
    auto dims = parse_dims(st.dims);
    AnnotateOptions opt;
    opt.cache_dir = st.cache_dir;
    opt.force = st.force;
    EmbedResult result = embed_corpus(corpus, *provider, dims, opt);
    for (const auto& [dim, rows] : result.embeddings) {
        out << dim.id() << ": " << rows.rows << " vectors of width " << rows.cols << " -> "
            << EmbeddingCache::location(st.cache_dir, corpus.dataset(), dim).string() << "\n";
    }
    out << result.provider_calls << " provider calls, " << result.failures.size() << " failures\n";
    return result.failures.empty() ? 0 : 2;
}

int cmd_reduce(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    auto provider = st.provider.make();
    auto dims = parse_dims(st.dims);

    uint32_t max_width = 0;
    for (uint32_t w : st.widths) {
        if (w < provider->embedding_width()) max_width = std::max(max_width, w);
    }
    if (max_width == 0)
        throw DataError("no reduced widths below the provider width " +
                        std::to_string(provider->embedding_width()) + " requested");

    Split split;
    if (st.fit_source_only) {
        auto splits = st.split.splits(corpus);
        if (splits.size() != 1)
            throw DataError("--fit-source-only needs a single explicit split");
        split = std::move(splits.front().second);
    } else {
        // source + target of any rotation is the whole corpus
        split.source = corpus.documents();
    }

    BuildOptions bopt;
    bopt.cache_dir = st.cache_dir;
    bopt.force = st.force;
    auto models = fit_split_pca(split, corpus.dataset(), *provider, dims, {max_width}, bopt,
                                st.fit_source_only);
    std::filesystem::create_directories(st.pca_dir);
    for (const auto& [dim, model] : models) {
        uint64_t hash = config_hash_of({dataset_name(corpus.dataset()), provider->config_id(),
                                        dim.id(), st.fit_source_only ? "source" : "all"});
        auto path = pca_model_path(st.pca_dir, corpus.dataset(), dim);
        model.save(path, hash);
        out << dim.id() << ": fitted k=" << model.k << " on " << model.fitted_on
            << " samples -> " << path.string() << "\n";
    }
    return 0;
}

int cmd_build_index(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    auto provider = st.provider.make();
    auto dims = parse_dims(st.dims);
    auto splits = st.split.splits(corpus);
    if (splits.size() != 1)
        throw DataError("build-index writes one database per split; select a single split");
    const auto& [split_name, split] = splits.front();

    for (uint32_t w : st.widths) {
        RetrievalOpts check = st.retrieval;
        check.width = w;
        check.validate(provider->embedding_width(), st.force);
    }

    std::map<AffectDimension, PcaModel> models;
    bool needs_pca = false;
    for (uint32_t w : st.widths) {
        if (w < provider->embedding_width()) needs_pca = true;
    }
    if (needs_pca) {
        for (const auto& dim : dims) {
            auto path = pca_model_path(st.pca_dir, corpus.dataset(), dim);
            if (!std::filesystem::exists(path))
                throw DataError("missing pca model " + path.string() +
                                "; run `affectrag reduce` first");
            uint64_t stored = 0;
            PcaModel model = PcaModel::load(path, &stored);
            uint64_t expected = config_hash_of({dataset_name(corpus.dataset()),
                                                provider->config_id(), dim.id(),
                                                st.fit_source_only ? "source" : "all"});
            if (stored != expected && !st.force)
                throw DataError(path.string() +
                                " was fitted under a different config; rerun `affectrag reduce` "
                                "or pass --force");
            models.emplace(dim, std::move(model));
        }
    }

    BuildOptions bopt;
    bopt.cache_dir = st.cache_dir;
    bopt.force = st.force;
    RetrievalDatabase db = build_database(split, corpus.dataset(), *provider, dims, st.widths,
                                          models, bopt);
    if (st.out.empty()) throw DataError("--out database path is required");
    uint64_t hash = config_hash_of({dataset_name(corpus.dataset()), provider->config_id(),
                                    dims_key(dims), widths_key(st.widths), split_name});
    db.save(st.out, hash);
    out << "built " << db.namespaces().size() << " namespaces over " << split.source.size()
        << " source + " << split.target.size() << " target docs (split " << split_name << ") -> "
        << st.out << "\n";
    return 0;
}

int cmd_retrieve(const CliState& st, std::ostream& out) {
    if (st.db_file.empty()) throw DataError("--db is required; run `affectrag build-index` first");
    RetrievalDatabase db = RetrievalDatabase::load(st.db_file);
    AffectDimension dim = st.retrieval.dimension();
    auto result = retrieve_all(db, dim, st.retrieval.width, st.retrieval.k, st.retrieval.threshold);

    std::ostringstream lines;
    size_t total_neighbors = 0;
    for (const auto& [target, neighbors] : result) {
        nlohmann::json j{{"target", target}};
        j["neighbors"] = nlohmann::json::array();
        for (const auto& n : neighbors) {
            j["neighbors"].push_back({{"doc_id", n.doc_id}, {"score", n.score}});
        }
        lines << j.dump() << "\n";
        total_neighbors += neighbors.size();
    }
    if (!st.out.empty()) {
        write_text_file(st.out, lines.str());
        out << "wrote " << result.size() << " retrieval lists to " << st.out << "\n";
    } else {
        out << lines.str();
    }
    out << result.size() << " targets, " << total_neighbors << " neighbors total\n";
    return 0;
}

// Builds PCA (when needed) and the database for one split in memory.
RetrievalDatabase build_split_db(const CliState& st, const CorpusStore& corpus, const Split& split,
                                 AffectProvider& provider, const AffectDimension& dim) {
    BuildOptions bopt;
    bopt.cache_dir = st.cache_dir;
    bopt.force = st.force;
    std::map<AffectDimension, PcaModel> models;
    if (st.retrieval.width < provider.embedding_width()) {
        models = fit_split_pca(split, corpus.dataset(), provider, {dim}, {st.retrieval.width},
                               bopt, st.fit_source_only);
    }
    return build_database(split, corpus.dataset(), provider, {dim}, {st.retrieval.width}, models,
                          bopt);
}

int cmd_render(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    auto provider = st.provider.make();
    AffectDimension dim = st.retrieval.dimension();
    st.retrieval.validate(provider->embedding_width(), st.force);
    auto splits = st.split.splits(corpus);
    if (splits.size() != 1) throw DataError("render needs a single split");
    const auto& split = splits.front().second;

    PromptConfig pc;
    pc.tmpl = parse_template(st.template_name);
    pc.dataset = corpus.dataset();
    pc.dimension = dim;
    pc.k = st.retrieval.k;
    pc.custom_task_prompt = task_prompt_override(st, corpus);

    RetrievalDatabase db = build_split_db(st, corpus, split, *provider, dim);
    auto neighbors = retrieve_for_split(db, split, dim, st.retrieval.width, st.retrieval.k,
                                        st.retrieval.threshold);

    std::map<std::string, ExplicitAffect> affect;
    if (pc.tmpl == Template::T2) {
        if (!st.annotations_file.empty()) {
            affect = load_annotations(st.annotations_file);
        } else {
            AnnotateOptions aopt;
            aopt.cache_dir = st.cache_dir;
            aopt.force = st.force;
            affect = annotate_corpus(corpus, *provider, {dim}, aopt).affect;
        }
    }

    if (st.out_dir.empty()) throw DataError("--out-dir is required");
    std::filesystem::create_directories(st.out_dir);
    size_t written = 0;
    for (const auto& doc : split.target) {
        std::vector<PromptExample> examples;
        for (const auto& n : neighbors[doc.id]) {
            const Document& src = corpus.by_id(n.doc_id);
            PromptExample ex{src.id, src.text, src.label, ""};
            if (pc.tmpl == Template::T2) ex.affect_value = format_affect(dim, affect.at(src.id));
            examples.push_back(std::move(ex));
        }
        RenderedPrompt rendered =
            pc.tmpl == Template::T2
                ? render_t2(pc, corpus.scheme(), doc.text, format_affect(dim, affect.at(doc.id)),
                            examples)
                : render_t1(pc, corpus.scheme(), doc.text, examples);
        write_text_file(std::filesystem::path(st.out_dir) / (doc.id + ".txt"), rendered.text);
        ++written;
    }
    out << "wrote " << written << " prompts to " << st.out_dir << "\n";
    return 0;
}

int cmd_run(const CliState& st, std::ostream& out) {
    CorpusStore corpus = load_cli_corpus(st);
    auto provider = st.provider.make();
    auto llm = make_llm(st.llm_kind, st.llm_url, st.model, st.echo_reply);
    AffectDimension dim = st.retrieval.dimension();
    st.retrieval.validate(provider->embedding_width(), st.force);

    PromptConfig pc;
    pc.tmpl = parse_template(st.template_name);
    pc.dataset = corpus.dataset();
    pc.dimension = dim;
    pc.k = st.retrieval.k;
    pc.custom_task_prompt = task_prompt_override(st, corpus);

    PipelineConfig cfg;
    cfg.dimension = dim;
    cfg.width = st.retrieval.width;
    cfg.k = st.retrieval.k;
    cfg.threshold = st.retrieval.threshold;
    cfg.cache_dir = st.cache_dir;
    cfg.force = st.force;
    cfg.random_examples = st.random_examples;
    cfg.random_seed = st.seed;

    std::vector<std::pair<std::string, std::vector<Prediction>>> per_split;
    for (const auto& [name, split] : st.split.splits(corpus)) {
        RetrievalDatabase db = build_split_db(st, corpus, split, *provider, dim);
        per_split.emplace_back(name,
                               run_pipeline(split, db, corpus.scheme(), pc, cfg, *llm, *provider));
    }

    PooledReport report = pool_and_report(per_split, corpus.scheme());
    out << report_table(report);

    if (!st.out.empty()) {
        std::vector<Prediction> all;
        for (auto& [name, preds] : per_split)
            all.insert(all.end(), preds.begin(), preds.end());
        uint64_t hash = config_hash_of({dataset_name(corpus.dataset()), provider->config_id(),
                                        llm->model_name(), dim.id(),
                                        std::to_string(st.retrieval.width),
                                        std::to_string(st.retrieval.k),
                                        std::to_string(st.retrieval.threshold), st.template_name,
                                        std::to_string(st.seed)});
        save_predictions(all, st.out, hash);
        out << "wrote " << all.size() << " predictions to " << st.out << "\n";
    }
    return 0;
}

int cmd_evaluate(const CliState& st, std::ostream& out) {
    if (st.predictions_file.empty()) throw DataError("--predictions is required");
    std::vector<Prediction> preds = load_predictions(st.predictions_file);
    if (preds.empty()) throw DataError("predictions file holds no records");
    LabelScheme scheme = st.dataset.scheme();

    std::vector<std::pair<std::string, std::vector<Prediction>>> per_split;
    if (!st.corpus_file.empty()) {
        CorpusStore corpus = load_cli_corpus(st);
        std::map<std::string, std::vector<Prediction>> by_domain;
        for (const auto& p : preds) by_domain[corpus.by_id(p.doc_id).domain].push_back(p);
        for (auto& [domain, group] : by_domain) per_split.emplace_back(domain, std::move(group));
    } else {
        per_split.emplace_back("all", preds);
    }

    PooledReport report = pool_and_report(per_split, scheme);
    out << report_table(report);
    if (!st.out.empty()) {
        write_text_file(st.out, report_csv(report, "predictions=" + st.predictions_file));
        out << "wrote report to " << st.out << "\n";
    }
    return 0;
}

int cmd_stats(const CliState& st, std::ostream& out) {
    bool did_something = false;

    if (!st.annotations_file.empty()) {
        CorpusStore corpus = load_cli_corpus(st);
        auto affect = load_annotations(st.annotations_file);
        ClassAffectReport report = class_affect_report(corpus, affect, corpus.scheme());
        out << class_affect_table(report, corpus.scheme());
        write_text_file(st.out_prefix + "_class_stats.csv",
                        class_stats_csv(report, corpus.scheme()));
        write_text_file(st.out_prefix + "_histograms.csv",
                        histogram_csv(report, corpus.scheme()));
        out << "wrote " << st.out_prefix << "_class_stats.csv and " << st.out_prefix
            << "_histograms.csv\n";
        did_something = true;
    }

    if (!st.db_file.empty()) {
        CorpusStore corpus = load_cli_corpus(st);
        RetrievalDatabase db = RetrievalDatabase::load(st.db_file);
        AffectDimension dim = st.retrieval.dimension();

        if (!st.export_3d_file.empty()) {
            write_text_file(st.export_3d_file, export_reduced_3d(db, dim, corpus));
            out << "wrote 3d export to " << st.export_3d_file << "\n";
            did_something = true;
        }

        // Pairwise top-k similarity statistics per class pair over the stored
        // vectors at the requested width.
        const IndexNamespace& ns = db.ns(dim, st.retrieval.width);
        std::map<int, MatrixF> by_class;
        for (size_t i = 0; i < ns.ids.size(); ++i) {
            by_class[corpus.by_id(ns.ids[i]).label].push_row(ns.vectors.row(i));
        }
        out << "top-" << st.retrieval.k << " cosine similarity group means (" << dim.id()
            << ", width " << st.retrieval.width << "):\n";
        std::ostringstream csv;
        csv << "group_a,group_b,mean,n_values,t_vs_within,p_vs_within\n";
        for (const auto& [label_a, rows_a] : by_class) {
            TopkSimilarityStats within =
                topk_similarity_stats(rows_a, rows_a, st.retrieval.k, /*exclude_self=*/true);
            for (const auto& [label_b, rows_b] : by_class) {
                auto stats = label_a == label_b
                                 ? within
                                 : topk_similarity_stats(rows_a, rows_b, st.retrieval.k, false);
                std::string pair = corpus.scheme().name_of(label_a) + "-" +
                                   corpus.scheme().name_of(label_b);
                out << "  " << pair << ": mean " << stats.grand_mean_pooled;
                csv << corpus.scheme().name_of(label_a) << "," << corpus.scheme().name_of(label_b)
                    << "," << stats.grand_mean_pooled << "," << stats.pooled.size();
                if (label_a != label_b) {
                    TTestResult t = similarity_group_ttest(stats.pooled, within.pooled);
                    out << " (vs within: t=" << t.t << " p=" << t.p << ")";
                    csv << "," << t.t << "," << t.p;
                } else {
                    csv << ",,";
                }
                out << "\n";
                csv << "\n";
            }
        }
        if (!st.out.empty()) {
            write_text_file(st.out, csv.str());
            out << "wrote similarity stats to " << st.out << "\n";
        }
        did_something = true;
    }

    if (!did_something)
        throw DataError("stats needs --annotations (explicit report) and/or --db (similarity)");
    return 0;
}

int cmd_sweep(const CliState& st, std::ostream& out) {
    CorpusStore corpus = st.synthetic_docs > 0
                             ? make_synthetic_corpus({st.synthetic_docs, 4, 2, st.seed})
                             : load_cli_corpus(st);
    auto provider = st.provider.make();
    auto llm = make_llm(st.llm_kind, st.llm_url, st.model, st.echo_reply);
    auto dims = parse_dims(st.dims);

    std::ostringstream csv;
    csv << "dim,width,k,accuracy,precision,recall,f1\n" << std::setprecision(10);
    out << std::left << std::setw(14) << "dim" << std::right << std::setw(7) << "width"
        << std::setw(5) << "k" << std::setw(10) << "acc" << std::setw(10) << "f1" << "\n";

    for (const auto& dim : dims) {
        for (uint32_t width : st.widths) {
            RetrievalOpts check = st.retrieval;
            check.width = width;
            check.validate(provider->embedding_width(), st.force);
            for (size_t k : st.k_list) {
                PromptConfig pc;
                pc.tmpl = parse_template(st.template_name);
                pc.dataset = corpus.dataset();
                pc.dimension = dim;
                pc.k = k;
                pc.custom_task_prompt = task_prompt_override(st, corpus);
                PipelineConfig cfg;
                cfg.dimension = dim;
                cfg.width = width;
                cfg.k = k;
                cfg.threshold = st.retrieval.threshold;
                cfg.cache_dir = st.cache_dir;
                cfg.force = st.force;
                cfg.random_examples = st.random_examples;
                cfg.random_seed = st.seed;

                std::vector<std::pair<std::string, std::vector<Prediction>>> per_split;
                for (const auto& [name, split] : st.split.splits(corpus)) {
                    CliState local = st;
                    local.retrieval.width = width;
                    RetrievalDatabase db = build_split_db(local, corpus, split, *provider, dim);
                    per_split.emplace_back(
                        name, run_pipeline(split, db, corpus.scheme(), pc, cfg, *llm, *provider));
                }
                EvalReport r = pool_and_report(per_split, corpus.scheme()).overall;
                csv << dim.id() << "," << width << "," << k << "," << r.accuracy << ","
                    << r.precision << "," << r.recall << "," << r.f1 << "\n";
                out << std::left << std::setw(14) << dim.id() << std::right << std::setw(7)
                    << width << std::setw(5) << k << std::fixed << std::setprecision(4)
                    << std::setw(10) << r.accuracy << std::setw(10) << r.f1 << "\n";
                out.unsetf(std::ios::fixed);
            }
        }
    }
    if (!st.out.empty()) {
        write_text_file(st.out, csv.str());
        out << "wrote sweep results to " << st.out << "\n";
    }
    return 0;
}

int cmd_bench(const CliState& st, std::ostream& out) {
    AffectDimension dim = st.retrieval.dimension();
    std::ostringstream csv;
    csv << "width,mean_ms,p95_ms,queries\n" << std::setprecision(10);
    out << std::right << std::setw(7) << "width" << std::setw(14) << "mean_ms" << std::setw(14)
        << "p95_ms" << "\n";

    auto bench_db = [&](const RetrievalDatabase& db, uint32_t width) {
        BenchResult r = bench_retrieval(db, dim, width, st.retrieval.k, st.retrieval.threshold,
                                        st.queries, st.warmup);
        csv << r.width << "," << r.mean_ms << "," << r.p95_ms << "," << r.queries << "\n";
        out << std::setw(7) << r.width << std::fixed << std::setprecision(5) << std::setw(14)
            << r.mean_ms << std::setw(14) << r.p95_ms << "\n";
        out.unsetf(std::ios::fixed);
    };

    if (st.synthetic_docs > 0) {
        // Single class with a strong signal keeps every candidate above the
        // threshold at every width, so the scored width is the only cost
        // that varies. Identity storage per width, no PCA.
        CorpusStore corpus = make_synthetic_corpus({st.synthetic_docs, 4, 1, st.seed});
        Split split = leave_one_domain_out(corpus, "domain-0");
        for (uint32_t width : st.widths) {
            MockProviderOptions mo;
            mo.width = width;
            mo.lambda = 4.0;
            mo.seed = st.seed;
            MockAffectProvider provider(mo);
            RetrievalDatabase db =
                build_database(split, corpus.dataset(), provider, {dim}, {width}, {}, {});
            bench_db(db, width);
        }
    } else if (!st.db_file.empty()) {
        RetrievalDatabase db = RetrievalDatabase::load(st.db_file);
        for (uint32_t width : st.widths) bench_db(db, width);
    } else {
        throw DataError("bench needs --synthetic N or --db FILE");
    }

    if (!st.out.empty()) {
        write_text_file(st.out, csv.str());
        out << "wrote bench results to " << st.out << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Affect-based retrieval-augmented misinformation detection pipeline"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI/TOML sections per subcommand)");

    CliState st;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--cache-dir", st.cache_dir, "Artifact cache directory")
            ->default_val(st.cache_dir);
        cmd->add_flag("--force", st.force, "Ignore config-hash mismatches on cached artifacts");
    };

    auto* ingest = app.add_subcommand("ingest", "Load, validate and normalize a corpus file");
    ingest->add_option("--input,--corpus", st.corpus_file, "Corpus file (JSON lines)")->required();
    st.dataset.attach(ingest);
    ingest->add_option("--out", st.out, "Write the normalized corpus here");

    auto* annotate = app.add_subcommand("annotate", "Obtain explicit affect labels per document");
    annotate->add_option("--corpus", st.corpus_file, "Corpus file")->required();
    st.dataset.attach(annotate);
    st.provider.attach(annotate);
    annotate->add_option("--dims", st.dims, "Affective dimensions (or 'all')")->delimiter(',');
    annotate->add_option("--out", st.out, "Annotations output file (JSON lines)");
    add_common(annotate);

    auto* embed = app.add_subcommand("embed", "Populate the implicit embedding cache");
    embed->add_option("--corpus", st.corpus_file, "Corpus file")->required();
    st.dataset.attach(embed);
    st.provider.attach(embed);
    embed->add_option("--dims", st.dims, "Affective dimensions (or 'all')")->delimiter(',');
    add_common(embed);

    auto* reduce = app.add_subcommand("reduce", "Fit PCA models over cached embeddings");
    reduce->add_option("--corpus", st.corpus_file, "Corpus file")->required();
    st.dataset.attach(reduce);
    st.provider.attach(reduce);
    reduce->add_option("--dims", st.dims, "Affective dimensions (or 'all')")->delimiter(',');
    reduce->add_option("--widths", st.widths, "Reduced widths to support")->delimiter(',');
    reduce->add_option("--pca-dir", st.pca_dir, "Model output directory")->default_val(st.pca_dir);
    reduce->add_flag("--fit-source-only", st.fit_source_only,
                     "Fit on source-domain embeddings only");
    st.split.attach(reduce);
    add_common(reduce);

    auto* build = app.add_subcommand("build-index", "Build the retrieval database for a split");
    build->add_option("--corpus", st.corpus_file, "Corpus file")->required();
    st.dataset.attach(build);
    st.provider.attach(build);
    st.split.attach(build);
    build->add_option("--dims", st.dims, "Affective dimensions (or 'all')")->delimiter(',');
    build->add_option("--widths", st.widths, "Vector widths to store")->delimiter(',');
    build->add_option("--pca-dir", st.pca_dir, "Directory holding fitted PCA models")
        ->default_val(st.pca_dir);
    build->add_option("--out", st.out, "Database output file")->required();
    add_common(build);

    auto* retrieve = app.add_subcommand("retrieve", "Query top-k neighbors for every target");
    retrieve->add_option("--db", st.db_file, "Database file")->required();
    st.retrieval.attach(retrieve);
    retrieve->add_option("--out", st.out, "Neighbor lists output (JSON lines)");

    auto* render = app.add_subcommand("render", "Render prompts for offline inspection");
    render->add_option("--corpus", st.corpus_file, "Corpus file")->required();
    st.dataset.attach(render);
    st.provider.attach(render);
    st.split.attach(render);
    st.retrieval.attach(render);
    render->add_option("--template", st.template_name, "t1|t2")->default_val(st.template_name);
    render->add_option("--task-prompt", st.task_prompt,
                       "Override the task instruction (required wording for custom data)");
    render->add_option("--annotations", st.annotations_file,
                       "Annotations file (otherwise annotated on demand)");
    render->add_option("--out-dir", st.out_dir, "Prompt output directory")->required();
    add_common(render);

    auto* run = app.add_subcommand("run", "Full pipeline: retrieve, render, generate, parse");
    run->add_option("--corpus", st.corpus_file, "Corpus file")->required();
    st.dataset.attach(run);
    st.provider.attach(run);
    st.split.attach(run);
    st.retrieval.attach(run);
    run->add_option("--template", st.template_name, "t1|t2")->default_val(st.template_name);
    run->add_option("--task-prompt", st.task_prompt, "Override the task instruction");
    run->add_option("--llm", st.llm_kind, "LLM client: mock-majority|mock-echo|http")
        ->default_val(st.llm_kind);
    run->add_option("--llm-url", st.llm_url, "OpenAI-compatible base url (http llm)");
    run->add_option("--model", st.model, "Model name (http llm)");
    run->add_option("--echo-reply", st.echo_reply, "Canned reply for mock-echo")
        ->default_val(st.echo_reply);
    run->add_flag("--random-examples", st.random_examples,
                  "Sample source examples uniformly instead of affect retrieval");
    run->add_option("--seed", st.seed, "Seed for sampling")->default_val(st.seed);
    run->add_option("--out", st.out, "Predictions output file (JSON lines)");
    add_common(run);

    auto* evaluate = app.add_subcommand("evaluate", "Weighted metrics over saved predictions");
    evaluate->add_option("--predictions", st.predictions_file, "Predictions file")->required();
    st.dataset.attach(evaluate);
    evaluate->add_option("--corpus", st.corpus_file,
                         "Corpus file (enables per-domain rows)");
    evaluate->add_option("--out", st.out, "Report CSV output");

    auto* stats = app.add_subcommand("stats", "Affect statistics: class report and similarity");
    stats->add_option("--corpus", st.corpus_file, "Corpus file");
    st.dataset.attach(stats);
    stats->add_option("--annotations", st.annotations_file, "Annotations file (class report)");
    stats->add_option("--db", st.db_file, "Database file (similarity stats)");
    st.retrieval.attach(stats);
    stats->add_option("--out-prefix", st.out_prefix, "Prefix for class report CSVs")
        ->default_val(st.out_prefix);
    stats->add_option("--export-3d", st.export_3d_file, "Write width-3 coordinates CSV here");
    stats->add_option("--out", st.out, "Similarity stats CSV output");

    auto* sweep = app.add_subcommand("sweep", "F1 over k and width grids");
    sweep->add_option("--corpus", st.corpus_file, "Corpus file");
    sweep->add_option("--synthetic", st.synthetic_docs, "Use a seeded synthetic corpus of N docs");
    st.dataset.attach(sweep);
    st.provider.attach(sweep);
    st.split.attach(sweep);
    st.retrieval.attach(sweep, /*with_width=*/false);
    sweep->add_option("--dims", st.dims, "Affective dimensions (or 'all')")->delimiter(',');
    sweep->add_option("--widths", st.widths, "Widths to sweep")->delimiter(',');
    sweep->add_option("--k-list", st.k_list, "k values to sweep")->delimiter(',');
    sweep->add_option("--template", st.template_name, "t1|t2")->default_val(st.template_name);
    sweep->add_option("--task-prompt", st.task_prompt, "Override the task instruction");
    sweep->add_option("--llm", st.llm_kind, "LLM client")->default_val(st.llm_kind);
    sweep->add_option("--llm-url", st.llm_url, "OpenAI-compatible base url (http llm)");
    sweep->add_option("--model", st.model, "Model name (http llm)");
    sweep->add_flag("--random-examples", st.random_examples, "Random-example baseline");
    sweep->add_option("--seed", st.seed, "Seed")->default_val(st.seed);
    sweep->add_option("--out", st.out, "Sweep CSV output");
    add_common(sweep);

    auto* bench = app.add_subcommand("bench", "Per-query retrieval latency by width");
    bench->add_option("--db", st.db_file, "Database file");
    bench->add_option("--synthetic", st.synthetic_docs, "Synthetic corpus size");
    st.retrieval.attach(bench, /*with_width=*/false);
    bench->add_option("--widths", st.widths, "Widths to measure")->delimiter(',');
    bench->add_option("--queries", st.queries, "Timed queries per width")->default_val(st.queries);
    bench->add_option("--warmup", st.warmup, "Warm-up queries per width")->default_val(st.warmup);
    bench->add_option("--seed", st.seed, "Synthetic seed")->default_val(st.seed);
    bench->add_option("--out", st.out, "Bench CSV output");

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();    // parent flags like --config work after the subcommand name
        sub->configurable();   // [subcommand] sections in config files
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(st, out);
        if (annotate->parsed()) return cmd_annotate(st, out);
        if (embed->parsed()) return cmd_embed(st, out);
        if (reduce->parsed()) return cmd_reduce(st, out);
        if (build->parsed()) return cmd_build_index(st, out);
        if (retrieve->parsed()) return cmd_retrieve(st, out);
        if (render->parsed()) return cmd_render(st, out);
        if (run->parsed()) return cmd_run(st, out);
        if (evaluate->parsed()) return cmd_evaluate(st, out);
        if (stats->parsed()) return cmd_stats(st, out);
        if (sweep->parsed()) return cmd_sweep(st, out);
        if (bench->parsed()) return cmd_bench(st, out);
    } catch (const TransportError& e) {
        err << "upstream failure: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace affectrag

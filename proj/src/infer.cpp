#include "affectrag/infer.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>

#include "json.hpp"

namespace affectrag {

using nlohmann::json;

std::optional<int> parse_label(const std::string& raw, const LabelScheme& scheme) {
    // Pass 1: "<int>." tokens. The dot must not start a decimal fraction and
    // the digits must not continue a decimal ("2.1." stays out).
    for (size_t i = 0; i < raw.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(raw[i]))) continue;
        if (i > 0 && (std::isdigit(static_cast<unsigned char>(raw[i - 1])) || raw[i - 1] == '.'))
            continue;
        size_t end = i;
        while (end < raw.size() && std::isdigit(static_cast<unsigned char>(raw[end]))) ++end;
        if (end < raw.size() && raw[end] == '.' &&
            (end + 1 >= raw.size() || !std::isdigit(static_cast<unsigned char>(raw[end + 1])))) {
            int value = 0;
            try {
                value = std::stoi(raw.substr(i, end - i));
            } catch (const std::exception&) {
                i = end;
                continue;
            }
            if (scheme.has_label(value)) return value;
        }
        i = end;
    }

    // Pass 2: earliest case-insensitive whole-word class name; longer names
    // win at equal positions so "Unrelated" is not read as "Related".
    std::string low = lowercase(raw);
    std::optional<int> best;
    size_t best_pos = std::string::npos;
    size_t best_len = 0;
    for (const auto& [label, name] : scheme.classes) {
        std::string needle = lowercase(name);
        size_t pos = 0;
        while ((pos = low.find(needle, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(low[pos - 1]));
            size_t end = pos + needle.size();
            bool right_ok = end >= low.size() || !std::isalnum(static_cast<unsigned char>(low[end]));
            if (left_ok && right_ok) break;
            ++pos;
        }
        if (pos == std::string::npos) continue;
        if (pos < best_pos || (pos == best_pos && needle.size() > best_len)) {
            best = label;
            best_pos = pos;
            best_len = needle.size();
        }
    }
    return best;
}

std::vector<Prediction> run_pipeline(const Split& split, const RetrievalDatabase& db,
                                     const LabelScheme& scheme, const PromptConfig& prompt_config,
                                     const PipelineConfig& config, LlmClient& client,
                                     AffectProvider& provider) {
    const bool want_affect = prompt_config.tmpl == Template::T2;

    std::map<std::string, const Document*> source_by_id;
    for (const auto& doc : split.source) source_by_id.emplace(doc.id, &doc);

    // Neighbors per target; empty map entries degrade to zero-shot prompts.
    std::map<std::string, std::vector<Neighbor>> neighbors;
    if (config.k > 0 && !split.source.empty()) {
        if (config.random_examples) {
            std::vector<const Document*> pool;
            pool.reserve(split.source.size());
            for (const auto& doc : split.source) pool.push_back(&doc);
            for (const auto& target : split.target) {
                uint64_t state = fnv1a64(target.id) ^ (config.random_seed + 0x5851F42D4C957F2DULL);
                std::vector<Neighbor> picked;
                std::vector<const Document*> remaining = pool;
                size_t take = std::min(config.k, remaining.size());
                for (size_t i = 0; i < take; ++i) {
                    size_t j = i + static_cast<size_t>(uniform01(state) *
                                                       static_cast<double>(remaining.size() - i));
                    std::swap(remaining[i], remaining[j]);
                    picked.push_back({remaining[i]->id, 0.0});
                }
                neighbors[target.id] = std::move(picked);
            }
        } else {
            neighbors = retrieve_for_split(db, split, config.dimension, config.width, config.k,
                                           config.threshold);
        }
    }

    // Explicit affect for Template 2: annotate targets plus every retrieved
    // example on the pipeline dimension (cache-backed, resumable).
    std::map<std::string, ExplicitAffect> affect;
    if (want_affect) {
        std::set<std::string> needed;
        for (const auto& doc : split.target) needed.insert(doc.id);
        for (const auto& [tid, ns] : neighbors) {
            for (const auto& n : ns) needed.insert(n.doc_id);
        }
        std::vector<Document> docs;
        for (const auto& doc : split.source) {
            if (needed.count(doc.id)) docs.push_back(doc);
        }
        docs.insert(docs.end(), split.target.begin(), split.target.end());
        CorpusStore store(std::move(docs), db.dataset(), scheme);
        AnnotateOptions aopt{config.cache_dir, config.max_transport_failure_rate,
                             config.max_inflight, config.force};
        AffectDimension dim = prompt_config.dimension.value_or(config.dimension);
        AnnotateResult annotated = annotate_corpus(store, provider, {dim}, aopt);
        affect = std::move(annotated.affect);
    }

    ResponseCache cache(config.cache_dir.empty() ? std::filesystem::path{}
                                                 : config.cache_dir / "responses.jsonl");
    PromptConfig pc = prompt_config;
    pc.k = config.k;
    if (want_affect && !pc.dimension) pc.dimension = config.dimension;

    std::vector<Prediction> predictions(split.target.size());
    std::atomic<size_t> transport_failures{0};
    parallel_for(split.target.size(), config.max_inflight, [&](size_t i) {
        const Document& target = split.target[i];
        Prediction& pred = predictions[i];
        pred.doc_id = target.id;
        pred.gold = target.label;

        std::vector<PromptExample> examples;
        auto nit = neighbors.find(target.id);
        if (nit != neighbors.end()) {
            for (const auto& n : nit->second) {
                const Document* src = source_by_id.at(n.doc_id);
                PromptExample ex;
                ex.doc_id = src->id;
                ex.text = src->text;
                ex.label = src->label;
                if (want_affect) {
                    auto ait = affect.find(src->id);
                    if (ait == affect.end()) {
                        ++transport_failures;
                        pred.transport_failed = true;
                        return;
                    }
                    ex.affect_value = format_affect(*pc.dimension, ait->second);
                }
                examples.push_back(std::move(ex));
            }
        }

        RenderedPrompt rendered;
        if (want_affect) {
            auto ait = affect.find(target.id);
            if (ait == affect.end()) {
                ++transport_failures;
                pred.transport_failed = true;
                return;
            }
            rendered = render_t2(pc, scheme, target.text,
                                 format_affect(*pc.dimension, ait->second), examples);
        } else {
            rendered = render_t1(pc, scheme, target.text, examples);
        }

        pred.example_ids = rendered.example_ids;
        pred.prompt_hash = prompt_hash(rendered.text);
        try {
            pred.raw_output = generate(client, cache, rendered.text);
        } catch (const TransportError&) {
            pred.transport_failed = true;
            ++transport_failures;
            return;
        }
        pred.parsed_label = parse_label(pred.raw_output, scheme);
    });

    double failure_rate = split.target.empty()
                              ? 0.0
                              : static_cast<double>(transport_failures.load()) /
                                    static_cast<double>(split.target.size());
    if (failure_rate > config.max_transport_failure_rate) {
        throw TransportError("pipeline aborted: " + std::to_string(transport_failures.load()) +
                                 " of " + std::to_string(split.target.size()) +
                                 " generations failed transport",
                             /*retryable=*/false);
    }

    std::sort(predictions.begin(), predictions.end(),
              [](const Prediction& a, const Prediction& b) { return a.doc_id < b.doc_id; });
    return predictions;
}

void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path,
                      uint64_t config_hash) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write predictions: " + path.string());
    out << json{{"format_version", 1}, {"config_hash", hex64(config_hash)}}.dump() << "\n";
    for (const auto& p : predictions) {
        json j{{"doc_id", p.doc_id},
               {"raw_output", p.raw_output},
               {"gold", p.gold},
               {"example_ids", p.example_ids},
               {"prompt_hash", p.prompt_hash}};
        if (p.parsed_label) {
            j["parsed_label"] = *p.parsed_label;
        } else {
            j["parsed_label"] = nullptr;
        }
        if (p.transport_failed) j["transport_failed"] = true;
        out << j.dump() << "\n";
    }
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open predictions: " + path.string());
    std::vector<Prediction> out;
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
        if (!j.contains("doc_id")) continue;  // header
        Prediction p;
        p.doc_id = j.at("doc_id").get<std::string>();
        p.raw_output = j.value("raw_output", "");
        p.gold = j.at("gold").get<int>();
        if (j.contains("parsed_label") && !j["parsed_label"].is_null())
            p.parsed_label = j["parsed_label"].get<int>();
        if (j.contains("example_ids"))
            p.example_ids = j["example_ids"].get<std::vector<std::string>>();
        p.prompt_hash = j.value("prompt_hash", "");
        p.transport_failed = j.value("transport_failed", false);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace affectrag

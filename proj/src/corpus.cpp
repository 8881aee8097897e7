#include "affectrag/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "affectrag/util.hpp"
#include "json.hpp"

namespace affectrag {

using nlohmann::json;

std::string dataset_name(Dataset d) {
    switch (d) {
        case Dataset::AMTCele: return "amtcele";
        case Dataset::PHEME: return "pheme";
        case Dataset::COCO: return "coco";
        case Dataset::Custom: return "custom";
    }
    return "custom";
}

std::optional<Dataset> parse_dataset(std::string_view name) {
    std::string n = lowercase(trim(name));
    if (n == "amtcele") return Dataset::AMTCele;
    if (n == "pheme") return Dataset::PHEME;
    if (n == "coco") return Dataset::COCO;
    if (n == "custom") return Dataset::Custom;
    return std::nullopt;
}

LabelScheme LabelScheme::builtin(Dataset d) {
    LabelScheme s;
    s.dataset = d;
    switch (d) {
        case Dataset::AMTCele:
            s.classes = {{0, "Fake"}, {1, "Legit"}};
            break;
        case Dataset::PHEME:
            s.classes = {{0, "non-rumours"}, {1, "rumours"}};
            break;
        case Dataset::COCO:
            s.classes = {{0, "Unrelated"}, {1, "Related"}, {2, "Conspiracy"}};
            break;
        case Dataset::Custom:
            throw DataError("custom dataset requires an explicit label scheme file");
    }
    return s;
}

LabelScheme LabelScheme::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open label scheme file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("label scheme " + path.string() + ": " + e.what());
    }
    LabelScheme s;
    s.dataset = Dataset::Custom;
    if (!j.is_object() || j.empty()) throw DataError("label scheme must be a non-empty object of {int: name}");
    std::map<int, std::string> ordered;
    for (auto& [k, v] : j.items()) {
        if (!v.is_string()) throw DataError("label scheme values must be class names");
        ordered[std::stoi(k)] = v.get<std::string>();
    }
    int expected = 0;
    for (auto& [label, name] : ordered) {
        if (label != expected++)
            throw DataError("label scheme integers must be contiguous from 0");
        s.classes.emplace_back(label, name);
    }
    return s;
}

bool LabelScheme::has_label(int label) const {
    return label >= 0 && static_cast<size_t>(label) < classes.size();
}

const std::string& LabelScheme::name_of(int label) const {
    if (!has_label(label)) throw DataError("label " + std::to_string(label) + " outside scheme");
    return classes[static_cast<size_t>(label)].second;
}

CorpusStore::CorpusStore(std::vector<Document> docs, Dataset dataset, LabelScheme scheme)
    : docs_(std::move(docs)), dataset_(dataset), scheme_(std::move(scheme)) {
    for (size_t i = 0; i < docs_.size(); ++i) index_.emplace(docs_[i].id, i);
}

const Document* CorpusStore::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &docs_[it->second];
}

const Document& CorpusStore::by_id(const std::string& id) const {
    const Document* d = find(id);
    if (!d) throw DataError("unknown document id: " + id);
    return *d;
}

std::vector<std::string> CorpusStore::domains() const {
    std::set<std::string> names;
    for (const auto& d : docs_) names.insert(d.domain);
    return {names.begin(), names.end()};
}

bool CorpusStore::has_domain(const std::string& domain) const {
    return std::any_of(docs_.begin(), docs_.end(),
                       [&](const Document& d) { return d.domain == domain; });
}

std::map<std::string, std::map<int, size_t>> CorpusStore::domain_label_counts() const {
    std::map<std::string, std::map<int, size_t>> counts;
    for (const auto& d : docs_) ++counts[d.domain][d.label];
    return counts;
}

std::map<int, size_t> CorpusStore::label_counts() const {
    std::map<int, size_t> counts;
    for (const auto& d : docs_) ++counts[d.label];
    return counts;
}

CorpusStore load_corpus(const std::filesystem::path& path, Dataset dataset,
                        std::optional<LabelScheme> custom_scheme) {
    LabelScheme scheme = custom_scheme ? std::move(*custom_scheme) : LabelScheme::builtin(dataset);
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path.string());

    std::vector<Document> docs;
    std::set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed record: " + e.what());
        }
        auto fail = [&](const std::string& why) -> DataError {
            return DataError(path.string() + ":" + std::to_string(lineno) + ": " + why);
        };
        if (!j.is_object()) throw fail("record is not an object");
        if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
        if (!j.contains("text") || !j["text"].is_string()) throw fail("missing string field 'text'");
        if (!j.contains("domain") || !j["domain"].is_string()) throw fail("missing string field 'domain'");
        if (!j.contains("label") || !j["label"].is_number_integer()) throw fail("missing integer field 'label'");

        Document d;
        d.id = j["id"].get<std::string>();
        d.text = j["text"].get<std::string>();
        d.domain = trim(j["domain"].get<std::string>());
        d.label = j["label"].get<int>();
        if (trim(d.text).empty()) throw fail("empty text for id " + d.id);
        if (d.domain.empty()) throw fail("empty domain for id " + d.id);
        if (!scheme.has_label(d.label))
            throw fail("label " + std::to_string(d.label) + " outside the " +
                       dataset_name(dataset) + " scheme (id " + d.id + ")");
        if (!seen.insert(d.id).second) throw fail("duplicate id " + d.id);
        docs.push_back(std::move(d));
    }
    return CorpusStore(std::move(docs), dataset, std::move(scheme));
}

void save_corpus(const CorpusStore& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus file: " + path.string());
    for (const auto& d : corpus.documents()) {
        json j{{"id", d.id}, {"text", d.text}, {"domain", d.domain}, {"label", d.label}};
        out << j.dump() << "\n";
    }
}

Split leave_one_domain_out(const CorpusStore& corpus, const std::string& target_domain) {
    if (!corpus.has_domain(target_domain))
        throw DataError("unknown domain: " + target_domain);
    Split split;
    split.target_domains = {target_domain};
    for (const auto& d : corpus.documents()) {
        (d.domain == target_domain ? split.target : split.source).push_back(d);
    }
    return split;
}

Split fixed_target_split(const CorpusStore& corpus, const std::set<std::string>& target_domains) {
    if (target_domains.empty()) throw DataError("empty target set");
    for (const auto& name : target_domains) {
        if (!corpus.has_domain(name)) throw DataError("unknown domain: " + name);
    }
    Split split;
    split.target_domains = target_domains;
    for (const auto& d : corpus.documents()) {
        (target_domains.count(d.domain) ? split.target : split.source).push_back(d);
    }
    return split;
}

std::string ValidationReport::to_string() const {
    if (issues.empty()) return "corpus clean: no issues\n";
    std::ostringstream out;
    for (const auto& issue : issues) out << issue.message << "\n";
    return out.str();
}

ValidationReport validate_corpus(const CorpusStore& corpus) {
    ValidationReport report;
    std::map<std::string, size_t> id_counts;
    for (const auto& d : corpus.documents()) ++id_counts[d.id];
    for (const auto& [id, n] : id_counts) {
        if (n > 1) {
            report.issues.push_back({ValidationIssue::Kind::DuplicateId,
                                     "duplicate id '" + id + "' appears " + std::to_string(n) + " times"});
        }
    }
    for (const auto& d : corpus.documents()) {
        if (trim(d.text).empty()) {
            report.issues.push_back({ValidationIssue::Kind::EmptyText, "empty text for id '" + d.id + "'"});
        }
        if (!corpus.scheme().has_label(d.label)) {
            report.issues.push_back({ValidationIssue::Kind::UnknownLabel,
                                     "label " + std::to_string(d.label) + " outside scheme for id '" + d.id + "'"});
        }
    }

    constexpr double kImbalanceRatio = 10.0;
    for (const auto& [domain, counts] : corpus.domain_label_counts()) {
        size_t lo = SIZE_MAX, hi = 0;
        for (const auto& [label, scheme_class] : corpus.scheme().classes) {
            auto it = counts.find(label);
            size_t n = it == counts.end() ? 0 : it->second;
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        if (hi > 0 && (lo == 0 || static_cast<double>(hi) / static_cast<double>(lo) >= kImbalanceRatio)) {
            std::ostringstream msg;
            msg << "class imbalance in domain '" << domain << "':";
            for (const auto& [label, name] : corpus.scheme().classes) {
                auto it = counts.find(label);
                msg << " " << name << "=" << (it == counts.end() ? 0 : it->second);
            }
            report.issues.push_back({ValidationIssue::Kind::ClassImbalance, msg.str()});
        }
    }

    if (corpus.domains().size() == 1 && corpus.size() > 0) {
        report.issues.push_back({ValidationIssue::Kind::SingleDomain,
                                 "single-domain corpus: leave-one-domain-out yields an empty source pool"});
    }
    return report;
}

}  // namespace affectrag

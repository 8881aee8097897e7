#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace affectrag {

enum class Dataset { AMTCele, PHEME, COCO, Custom };

std::string dataset_name(Dataset d);
std::optional<Dataset> parse_dataset(std::string_view name);

struct Document {
    std::string id;
    std::string text;
    std::string domain;
    int label = 0;
};

// Ordered (integer, name) class list for one dataset. Integers are contiguous
// from 0. COCO keeps class 0 "Unrelated" even though no corpus row carries it:
// the task prompt offers it, so predictions of 0 are valid-but-wrong.
struct LabelScheme {
    Dataset dataset = Dataset::Custom;
    std::vector<std::pair<int, std::string>> classes;

    static LabelScheme builtin(Dataset d);
    static LabelScheme from_file(const std::filesystem::path& path);

    size_t num_classes() const { return classes.size(); }
    bool has_label(int label) const;
    const std::string& name_of(int label) const;
};

class CorpusStore {
public:
    CorpusStore() = default;
    CorpusStore(std::vector<Document> docs, Dataset dataset, LabelScheme scheme);

    Dataset dataset() const { return dataset_; }
    const LabelScheme& scheme() const { return scheme_; }
    const std::vector<Document>& documents() const { return docs_; }
    size_t size() const { return docs_.size(); }

    const Document* find(const std::string& id) const;
    const Document& by_id(const std::string& id) const;  // throws DataError when absent

    // Sorted unique domain names.
    std::vector<std::string> domains() const;
    bool has_domain(const std::string& domain) const;

    // domain -> label -> count tallies.
    std::map<std::string, std::map<int, size_t>> domain_label_counts() const;
    std::map<int, size_t> label_counts() const;

private:
    std::vector<Document> docs_;
    Dataset dataset_ = Dataset::Custom;
    LabelScheme scheme_;
    std::map<std::string, size_t> index_;  // first occurrence wins when ids collide
};

// Loads the line-delimited record format: one JSON object per line with keys
// id, text, domain, label and optional meta. Strict: malformed lines,
// duplicate ids and out-of-scheme labels are errors naming the line number.
CorpusStore load_corpus(const std::filesystem::path& path, Dataset dataset,
                        std::optional<LabelScheme> custom_scheme = std::nullopt);

void save_corpus(const CorpusStore& corpus, const std::filesystem::path& path);

// Target/source partition of a corpus for cross-domain evaluation.
struct Split {
    std::vector<Document> target;  // D_T, size N
    std::vector<Document> source;  // D_S, size M
    std::set<std::string> target_domains;
};

Split leave_one_domain_out(const CorpusStore& corpus, const std::string& target_domain);
Split fixed_target_split(const CorpusStore& corpus, const std::set<std::string>& target_domains);

struct ValidationIssue {
    enum class Kind { DuplicateId, EmptyText, UnknownLabel, ClassImbalance, SingleDomain };
    Kind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool clean() const { return issues.empty(); }
    std::string to_string() const;
};

// Reporting only; never throws. Duplicate ids / empty texts / unknown labels
// can only appear in programmatically built stores (load_corpus rejects them).
// Domains with class ratios beyond 10:1 (or a single class) get an imbalance
// flag; single-domain corpora are flagged because leave-one-domain-out would
// produce an empty source pool.
ValidationReport validate_corpus(const CorpusStore& corpus);

}  // namespace affectrag

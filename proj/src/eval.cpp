#include "affectrag/eval.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "affectrag/util.hpp"

namespace affectrag {

Matrix<int64_t> confusion(std::span<const Prediction> predictions, const LabelScheme& scheme) {
    size_t c = scheme.num_classes();
    Matrix<int64_t> m(c, c);
    for (const auto& p : predictions) {
        if (!scheme.has_label(p.gold))
            throw DataError("gold label " + std::to_string(p.gold) + " outside scheme for " +
                            p.doc_id);
        size_t gold = static_cast<size_t>(p.gold);
        if (p.parsed_label && scheme.has_label(*p.parsed_label)) {
            ++m.at(gold, static_cast<size_t>(*p.parsed_label));
        } else {
            ++m.at(gold, (gold + 1) % c);
        }
    }
    return m;
}

EvalReport weighted_metrics(std::span<const Prediction> predictions, const LabelScheme& scheme) {
    if (predictions.empty()) throw DataError("weighted_metrics: no predictions");
    EvalReport report;
    report.n = predictions.size();

    std::map<int, size_t> support, predicted, hits;
    size_t correct = 0, unparseable = 0;
    for (const auto& [label, name] : scheme.classes) {
        support[label] = predicted[label] = hits[label] = 0;
    }
    for (const auto& p : predictions) {
        if (!scheme.has_label(p.gold))
            throw DataError("gold label " + std::to_string(p.gold) + " outside scheme for " +
                            p.doc_id);
        ++support[p.gold];
        if (!p.parsed_label || !scheme.has_label(*p.parsed_label)) {
            ++unparseable;
            continue;
        }
        ++predicted[*p.parsed_label];
        if (*p.parsed_label == p.gold) {
            ++hits[p.gold];
            ++correct;
        }
    }

    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n);
    report.unparseable_rate = static_cast<double>(unparseable) / static_cast<double>(report.n);

    for (const auto& [label, name] : scheme.classes) {
        ClassMetrics cm;
        cm.support = support[label];
        double tp = static_cast<double>(hits[label]);
        cm.precision = predicted[label] > 0 ? tp / static_cast<double>(predicted[label]) : 0.0;
        cm.recall = cm.support > 0 ? tp / static_cast<double>(cm.support) : 0.0;
        cm.f1 = (cm.precision + cm.recall) > 0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        report.per_class[label] = cm;

        double weight = static_cast<double>(cm.support) / static_cast<double>(report.n);
        report.precision += weight * cm.precision;
        report.recall += weight * cm.recall;
        report.f1 += weight * cm.f1;
    }
    return report;
}

PooledReport pool_and_report(
    const std::vector<std::pair<std::string, std::vector<Prediction>>>& per_split_predictions,
    const LabelScheme& scheme) {
    PooledReport report;
    std::vector<Prediction> pooled;
    std::set<std::string> seen;
    for (const auto& [name, preds] : per_split_predictions) {
        if (preds.empty()) throw DataError("pool_and_report: split '" + name + "' is empty");
        for (const auto& p : preds) {
            if (!seen.insert(p.doc_id).second)
                throw DataError("pool_and_report: doc id '" + p.doc_id +
                                "' appears in more than one split");
            pooled.push_back(p);
        }
        report.per_split.emplace_back(name, weighted_metrics(preds, scheme));
    }
    report.overall = weighted_metrics(pooled, scheme);
    return report;
}

static void csv_row(std::ostringstream& out, const std::string& name, const EvalReport& r) {
    out << name << "," << r.n << "," << r.accuracy << "," << r.precision << "," << r.recall << ","
        << r.f1 << "," << r.unparseable_rate << "\n";
}

std::string report_csv(const PooledReport& report, const std::string& config_line) {
    std::ostringstream out;
    out << std::setprecision(10);
    if (!config_line.empty()) out << "# " << config_line << "\n";
    out << "split,n,accuracy,precision,recall,f1,unparseable_rate\n";
    for (const auto& [name, r] : report.per_split) csv_row(out, name, r);
    csv_row(out, "overall", report.overall);
    return out.str();
}

static void table_row(std::ostringstream& out, const std::string& name, const EvalReport& r) {
    out << std::left << std::setw(22) << name << std::right << std::setw(8) << r.n << std::fixed
        << std::setprecision(4) << std::setw(10) << r.accuracy << std::setw(10) << r.precision
        << std::setw(10) << r.recall << std::setw(10) << r.f1;
    if (r.unparseable_rate > 0) {
        out << "  (unparseable " << std::setprecision(1) << 100.0 * r.unparseable_rate << "%)";
    }
    out << "\n";
    out.unsetf(std::ios::fixed);
}

std::string report_table(const PooledReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(22) << "split" << std::right << std::setw(8) << "n"
        << std::setw(10) << "acc" << std::setw(10) << "prec" << std::setw(10) << "rec"
        << std::setw(10) << "f1" << "\n";
    for (const auto& [name, r] : report.per_split) table_row(out, name, r);
    table_row(out, "overall", report.overall);
    return out.str();
}

}  // namespace affectrag

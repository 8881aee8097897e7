#include "affectrag/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "affectrag/util.hpp"

namespace affectrag {

GroupStats group_stats(std::span<const double> samples) {
    GroupStats g;
    g.n = samples.size();
    if (g.n == 0) return g;
    double sum = 0;
    for (double v : samples) sum += v;
    g.mean = sum / static_cast<double>(g.n);
    if (g.n < 2) return g;
    double ss = 0;
    for (double v : samples) ss += (v - g.mean) * (v - g.mean);
    g.var = ss / static_cast<double>(g.n - 1);
    return g;
}

// Continued fraction for I_x(a,b) (modified Lentz).
static double incbeta_cf(double x, double a, double b) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-15;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double result = d;
    for (int m = 1; m <= 100000; ++m) {
        double dm = static_cast<double>(m);
        // even step
        double numer = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + numer * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + numer / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        result *= d * c;
        // odd step
        numer = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + numer * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + numer / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double mult = d * c;
        result *= mult;
        if (std::fabs(mult - 1.0) < eps) break;
    }
    return result;
}

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0) || std::isnan(x)) return NAN;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double log_prefix = a * std::log(x) + b * std::log1p(-x) -
                        (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_prefix) * incbeta_cf(x, a, b) / a;
    }
    return 1.0 - std::exp(log_prefix) * incbeta_cf(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0) throw DataError("t-test: non-positive degrees of freedom");
    if (!std::isfinite(t)) return 0.0;
    double x = df / (t * t + df);
    return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

TTestResult welch_t_from_summary(const GroupStats& a, const GroupStats& b) {
    if (a.n < 2 || b.n < 2) throw DataError("welch t-test: both groups need n >= 2");
    if (a.var < 0 || b.var < 0) throw DataError("welch t-test: negative variance");
    double va = a.var / static_cast<double>(a.n);
    double vb = b.var / static_cast<double>(b.n);
    TTestResult r;
    if (va + vb == 0.0) {
        if (a.mean == b.mean) {
            // Identical constants: no evidence of difference.
            r.t = 0.0;
            r.df = static_cast<double>(a.n + b.n - 2);
            r.p = 1.0;
            return r;
        }
        throw DataError("welch t-test: both variances are zero with unequal means");
    }
    r.t = (a.mean - b.mean) / std::sqrt(va + vb);
    double denom = va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1);
    r.df = (va + vb) * (va + vb) / denom;
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

TTestResult welch_t(std::span<const double> a, std::span<const double> b) {
    return welch_t_from_summary(group_stats(a), group_stats(b));
}

TTestResult pooled_t_from_summary(const GroupStats& a, const GroupStats& b) {
    if (a.n < 2 || b.n < 2) throw DataError("pooled t-test: both groups need n >= 2");
    double df = static_cast<double>(a.n + b.n - 2);
    double sp2 = (static_cast<double>(a.n - 1) * a.var + static_cast<double>(b.n - 1) * b.var) / df;
    if (sp2 == 0.0) {
        if (a.mean == b.mean) return {0.0, 1.0, df};
        throw DataError("pooled t-test: zero pooled variance with unequal means");
    }
    TTestResult r;
    r.t = (a.mean - b.mean) /
          std::sqrt(sp2 * (1.0 / static_cast<double>(a.n) + 1.0 / static_cast<double>(b.n)));
    r.df = df;
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

// --- class-conditional report --------------------------------------------------

static std::vector<AffectDimension> regression_dims() {
    std::vector<AffectDimension> dims;
    for (Emotion e : kEmotions) dims.push_back(AffectDimension::eireg(e));
    dims.push_back(AffectDimension::vreg());
    return dims;
}

ClassAffectReport class_affect_report(const CorpusStore& corpus,
                                      const std::map<std::string, ExplicitAffect>& affect,
                                      const LabelScheme& scheme) {
    ClassAffectReport report;
    auto reg_dims = regression_dims();

    for (const auto& doc : corpus.documents()) {
        auto it = affect.find(doc.id);
        if (it == affect.end())
            throw DataError("class_affect_report: document " + doc.id + " is not annotated");
        for (const auto& dim : reg_dims) {
            if (!it->second.has(dim))
                throw DataError("class_affect_report: document " + doc.id + " missing " + dim.id());
        }
    }

    // Regression dimensions: per-class stats plus pairwise Welch tests.
    std::map<int, std::vector<const ExplicitAffect*>> by_class;
    for (const auto& doc : corpus.documents()) by_class[doc.label].push_back(&affect.at(doc.id));

    for (const auto& dim : reg_dims) {
        std::map<int, GroupStats> class_stats;
        for (const auto& [label, rows] : by_class) {
            std::vector<double> values;
            values.reserve(rows.size());
            for (const ExplicitAffect* ea : rows) values.push_back(std::get<double>(ea->get(dim)));
            GroupStats g = group_stats(values);
            ClassDimStats entry{dim, label, g, g.n < 2 || g.var == 0.0};
            if (entry.degenerate) {
                report.warnings.push_back("class " + scheme.name_of(label) + " on " + dim.id() +
                                          (g.n < 2 ? ": fewer than 2 members, stats suppressed"
                                                   : ": zero variance"));
            }
            report.stats.push_back(entry);
            class_stats[label] = g;
        }
        for (auto a = class_stats.begin(); a != class_stats.end(); ++a) {
            for (auto b = std::next(a); b != class_stats.end(); ++b) {
                if (a->second.n < 2 || b->second.n < 2) continue;
                try {
                    report.tests.push_back(
                        {dim, a->first, b->first, welch_t_from_summary(a->second, b->second)});
                } catch (const DataError& e) {
                    report.warnings.push_back(dim.id() + " " + scheme.name_of(a->first) + " vs " +
                                              scheme.name_of(b->first) + ": " + e.what());
                }
            }
        }
    }

    // Classification dimensions: label histograms.
    for (Emotion e : kEmotions) {
        AffectDimension dim = AffectDimension::eioc(e);
        std::map<int, std::map<int, size_t>> counts;  // class -> ordinal -> n
        for (const auto& doc : corpus.documents()) {
            const ExplicitAffect& ea = affect.at(doc.id);
            if (ea.has(dim)) ++counts[doc.label][std::get<int>(ea.get(dim))];
        }
        for (const auto& [label, hist] : counts) {
            for (const auto& [ordinal, n] : hist) {
                report.histograms.push_back(
                    {dim, label, std::string(kEIocClassNames[static_cast<size_t>(ordinal)]), n});
            }
        }
    }
    {
        AffectDimension dim = AffectDimension::voc();
        std::map<int, std::map<int, size_t>> counts;
        for (const auto& doc : corpus.documents()) {
            const ExplicitAffect& ea = affect.at(doc.id);
            if (ea.has(dim)) ++counts[doc.label][std::get<int>(ea.get(dim))];
        }
        for (const auto& [label, hist] : counts) {
            for (const auto& [ordinal, n] : hist) {
                report.histograms.push_back(
                    {dim, label, std::string(kVocClassNames[static_cast<size_t>(ordinal)]), n});
            }
        }
    }
    {
        AffectDimension dim = AffectDimension::ec();
        std::map<int, std::map<std::string, size_t>> counts;
        for (const auto& doc : corpus.documents()) {
            const ExplicitAffect& ea = affect.at(doc.id);
            if (!ea.has(dim)) continue;
            const auto s = std::get<std::set<std::string>>(ea.get(dim));
            if (s.empty()) {
                ++counts[doc.label]["neutral or no emotion"];
            } else {
                for (const auto& name : s) ++counts[doc.label][name];
            }
        }
        for (const auto& [label, hist] : counts) {
            for (const auto& [name, n] : hist) report.histograms.push_back({dim, label, name, n});
        }
    }
    return report;
}

std::string class_stats_csv(const ClassAffectReport& report, const LabelScheme& scheme) {
    std::ostringstream out;
    out << "kind,dimension,class_a,class_b,n,mean,var,t,p,df\n";
    out << std::setprecision(10);
    for (const auto& s : report.stats) {
        out << "stats," << s.dimension.id() << "," << scheme.name_of(s.label) << ",,"
            << s.stats.n << "," << s.stats.mean << "," << s.stats.var << ",,,\n";
    }
    for (const auto& t : report.tests) {
        out << "ttest," << t.dimension.id() << "," << scheme.name_of(t.class_a) << ","
            << scheme.name_of(t.class_b) << ",,,," << t.test.t << "," << t.test.p << ","
            << t.test.df << "\n";
    }
    return out.str();
}

std::string histogram_csv(const ClassAffectReport& report, const LabelScheme& scheme) {
    std::ostringstream out;
    out << "dimension,class,bucket,count\n";
    for (const auto& h : report.histograms) {
        out << h.dimension.id() << "," << scheme.name_of(h.label) << ",\"" << h.bucket << "\","
            << h.count << "\n";
    }
    return out.str();
}

std::string class_affect_table(const ClassAffectReport& report, const LabelScheme& scheme) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "dimension" << std::setw(16) << "class" << std::right
        << std::setw(8) << "n" << std::setw(12) << "mean" << std::setw(12) << "var" << "\n";
    for (const auto& s : report.stats) {
        out << std::left << std::setw(14) << s.dimension.id() << std::setw(16)
            << scheme.name_of(s.label) << std::right << std::setw(8) << s.stats.n << std::fixed
            << std::setprecision(4) << std::setw(12) << s.stats.mean << std::setw(12) << s.stats.var
            << (s.degenerate ? "  (degenerate)" : "") << "\n";
        out.unsetf(std::ios::fixed);
    }
    if (!report.tests.empty()) {
        out << "\n" << std::left << std::setw(14) << "dimension" << std::setw(30) << "pair"
            << std::right << std::setw(12) << "t" << std::setw(14) << "p" << "\n";
        for (const auto& t : report.tests) {
            out << std::left << std::setw(14) << t.dimension.id() << std::setw(30)
                << (scheme.name_of(t.class_a) + " vs " + scheme.name_of(t.class_b)) << std::right
                << std::fixed << std::setprecision(4) << std::setw(12) << t.test.t
                << std::scientific << std::setprecision(3) << std::setw(14) << t.test.p << "\n";
            out.unsetf(std::ios::fixed);
            out.unsetf(std::ios::scientific);
        }
    }
    for (const auto& w : report.warnings) out << "warning: " << w << "\n";
    return out.str();
}

// --- similarity statistics ------------------------------------------------------

TopkSimilarityStats topk_similarity_stats(const MatrixF& a, const MatrixF& b, size_t k,
                                          bool exclude_self) {
    if (a.cols != b.cols) throw DataError("topk_similarity_stats: width mismatch");
    size_t available = b.rows - (exclude_self ? 1 : 0);
    if (k == 0 || k > available)
        throw DataError("topk_similarity_stats: k=" + std::to_string(k) +
                        " exceeds available comparisons (" + std::to_string(available) + ")");

    TopkSimilarityStats out;
    std::vector<double> row_scores;
    row_scores.reserve(b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        row_scores.clear();
        for (size_t j = 0; j < b.rows; ++j) {
            if (exclude_self && i == j) continue;
            row_scores.push_back(cosine(a.row(i), b.row(j)));
        }
        std::partial_sort(row_scores.begin(), row_scores.begin() + static_cast<ptrdiff_t>(k),
                          row_scores.end(), std::greater<double>());
        double sum = 0;
        for (size_t t = 0; t < k; ++t) {
            out.pooled.push_back(row_scores[t]);
            sum += row_scores[t];
        }
        out.per_row_mean.push_back(sum / static_cast<double>(k));
    }
    if (!out.pooled.empty()) {
        double total = 0;
        for (double v : out.pooled) total += v;
        out.grand_mean_pooled = total / static_cast<double>(out.pooled.size());
        total = 0;
        for (double v : out.per_row_mean) total += v;
        out.grand_mean_of_rows = total / static_cast<double>(out.per_row_mean.size());
    }
    return out;
}

TTestResult similarity_group_ttest(std::span<const double> group_a,
                                   std::span<const double> group_b) {
    return welch_t(group_a, group_b);
}

std::string export_reduced_3d(const RetrievalDatabase& db, const AffectDimension& dim,
                              const CorpusStore& corpus) {
    const IndexNamespace& n = db.ns(dim, 3);
    std::ostringstream out;
    out << "doc_id,x,y,z,label\n" << std::setprecision(9);
    for (size_t i = 0; i < n.ids.size(); ++i) {
        auto row = n.vectors.row(i);
        out << n.ids[i] << "," << row[0] << "," << row[1] << "," << row[2] << ","
            << corpus.by_id(n.ids[i]).label << "\n";
    }
    return out.str();
}

}  // namespace affectrag

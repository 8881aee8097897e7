#pragma once

#include <span>
#include <string>
#include <vector>

#include "affectrag/affect.hpp"
#include "affectrag/corpus.hpp"
#include "affectrag/index.hpp"
#include "affectrag/matrix.hpp"

namespace affectrag {

struct GroupStats {
    size_t n = 0;
    double mean = 0;
    double var = 0;  // sample variance, 1/(n-1)
};

GroupStats group_stats(std::span<const double> samples);

struct TTestResult {
    double t = 0;
    double p = 1;   // two-sided
    double df = 0;  // Welch-Satterthwaite (fractional, never rounded)
};

// Regularized incomplete beta I_x(a,b), evaluated with the standard
// continued-fraction expansion.
double regularized_incomplete_beta(double x, double a, double b);

// Two-sided p-value for a t statistic with the given degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Welch's unequal-variance t-test from summary statistics. Group sizes and
// variances differ throughout the corpora, so Welch is the default; the
// pooled-variance Student form is available separately.
TTestResult welch_t_from_summary(const GroupStats& a, const GroupStats& b);
TTestResult welch_t(std::span<const double> a, std::span<const double> b);
TTestResult pooled_t_from_summary(const GroupStats& a, const GroupStats& b);

// --- class-conditional explicit-affect report ---------------------------------

struct ClassDimStats {
    AffectDimension dimension;
    int label = 0;
    GroupStats stats;
    bool degenerate = false;  // n < 2 or zero variance
};

struct ClassPairTest {
    AffectDimension dimension;
    int class_a = 0;
    int class_b = 0;
    TTestResult test;
};

struct HistogramRow {
    AffectDimension dimension;
    int label = 0;
    std::string bucket;
    size_t count = 0;
};

struct ClassAffectReport {
    std::vector<ClassDimStats> stats;       // EIreg x 4 emotions + Vreg, per class
    std::vector<ClassPairTest> tests;       // all class pairs per regression dimension
    std::vector<HistogramRow> histograms;   // EIoc / Voc / Ec label distributions
    std::vector<std::string> warnings;
};

// Requires every corpus document annotated on the regression dimensions;
// classification dimensions contribute whatever is present.
ClassAffectReport class_affect_report(const CorpusStore& corpus,
                                      const std::map<std::string, ExplicitAffect>& affect,
                                      const LabelScheme& scheme);

std::string class_stats_csv(const ClassAffectReport& report, const LabelScheme& scheme);
std::string histogram_csv(const ClassAffectReport& report, const LabelScheme& scheme);
std::string class_affect_table(const ClassAffectReport& report, const LabelScheme& scheme);

// --- pairwise similarity statistics -------------------------------------------

struct TopkSimilarityStats {
    std::vector<double> per_row_mean;  // mean of each A-row's k best similarities
    std::vector<double> pooled;        // all kept values, row-major
    double grand_mean_pooled = 0;      // mean of pooled (the reported statistic)
    double grand_mean_of_rows = 0;     // mean of per-row means, for comparison
};

// For each row of a, cosine against every row of b, keep the k largest.
// exclude_self skips element (i, i); pass it when a and b are the same group.
TopkSimilarityStats topk_similarity_stats(const MatrixF& a, const MatrixF& b, size_t k,
                                          bool exclude_self = false);

// Welch test over pooled top-k value groups (e.g. within-class vs cross-class).
TTestResult similarity_group_ttest(std::span<const double> group_a,
                                   std::span<const double> group_b);

// One line per document of the width-3 namespace: doc_id,x,y,z,label.
std::string export_reduced_3d(const RetrievalDatabase& db, const AffectDimension& dim,
                              const CorpusStore& corpus);

}  // namespace affectrag

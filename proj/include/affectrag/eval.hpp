#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "affectrag/corpus.hpp"
#include "affectrag/infer.hpp"
#include "affectrag/matrix.hpp"

namespace affectrag {

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    size_t support = 0;
};

// Weighted classification metrics: every aggregate is the support-weighted
// mean of per-class values. Unparseable predictions count as wrong for their
// gold class and never inflate any class's predicted count.
struct EvalReport {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::map<int, ClassMetrics> per_class;
    size_t n = 0;
    double unparseable_rate = 0;
};

// Gold-by-predicted count matrix. Unparseable predictions are routed to the
// synthetic wrong cell (gold+1 mod |C|) so entries still sum to n while the
// diagonal only counts real hits.
Matrix<int64_t> confusion(std::span<const Prediction> predictions, const LabelScheme& scheme);

EvalReport weighted_metrics(std::span<const Prediction> predictions, const LabelScheme& scheme);

struct PooledReport {
    EvalReport overall;  // computed on the concatenation, not averaged
    std::vector<std::pair<std::string, EvalReport>> per_split;
};

PooledReport pool_and_report(
    const std::vector<std::pair<std::string, std::vector<Prediction>>>& per_split_predictions,
    const LabelScheme& scheme);

std::string report_csv(const PooledReport& report, const std::string& config_line = "");
std::string report_table(const PooledReport& report);

}  // namespace affectrag

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nasp/asp.hpp"
#include "nasp/matrix.hpp"
#include "nasp/prediction.hpp"
#include "nasp/rules.hpp"

namespace nasp {

inline constexpr double kMinThreshold = 0.05;
inline constexpr double kMaxThreshold = 0.95;

struct Thresholds {
    std::vector<double> t;
    /// Labels without positive targets; their threshold stays at 0.5.
    std::vector<std::size_t> untuned;
};

/// Per label: candidates are the midpoints between consecutive distinct
/// probabilities plus 0.5, each clamped to [0.05, 0.95]. The candidate with
/// the best per-label F1 wins; ties go to the one closest to 0.5, then to the
/// smaller value.
Thresholds tune_thresholds(const RealMatrix& probs, const BinaryMatrix& targets);

/// decisions(i, j) = probs(i, j) >= thresholds[j].
PredictionBatch apply_thresholds(const RealMatrix& probs, const std::vector<double>& thresholds,
                                 const LabelVocab& vocab, std::vector<std::string> doc_ids);

/// F1 with the convention 2TP / (2TP + FP + FN), and `empty_value` when the
/// denominator is zero.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn, double empty_value = 1.0);

/// F1 of one label column at a given threshold.
double label_f1(const RealMatrix& probs, const BinaryMatrix& targets, std::size_t label, double threshold);

enum class ZeroSupport {
    one,   ///< label never occurring and never predicted scores F1 = 1
    zero,  ///< ... scores F1 = 0
};

struct LabelMetrics {
    std::string label;
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MetricsReport {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double hamming = 0.0;
    std::vector<LabelMetrics> per_label;
    ViolationReport consistency;
};

MetricsReport compute_metrics(const PredictionBatch& batch, const BinaryMatrix& targets, const RuleSet& rules,
                              ZeroSupport zero_support = ZeroSupport::one);

/// Only the classification figures, without the rule audit.
double micro_f1(const BinaryMatrix& decisions, const BinaryMatrix& targets);
double macro_f1(const BinaryMatrix& decisions, const BinaryMatrix& targets, ZeroSupport zero_support = ZeroSupport::one);
double hamming_loss(const BinaryMatrix& decisions, const BinaryMatrix& targets);

/// One line with the result table columns:
/// micro_f1, macro_f1, hamming, violations, viol_per_doc, viol_per_1k.
std::string format_metrics_row(const MetricsReport& report);
std::string metrics_report_json(const MetricsReport& report);

}  // namespace nasp

#include "nasp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "nasp/error.hpp"

namespace nasp {

namespace {

void check_same_shape(std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
    if (r1 != r2 || c1 != c2) {
        throw DimensionError("matrix shapes differ: " + std::to_string(r1) + "x" + std::to_string(c1) + " vs " +
                             std::to_string(r2) + "x" + std::to_string(c2));
    }
}

struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
};

Counts column_counts(const BinaryMatrix& decisions, const BinaryMatrix& targets, std::size_t j) {
    Counts c;
    for (std::size_t i = 0; i < decisions.rows(); ++i) {
        const bool p = decisions(i, j);
        const bool y = targets(i, j);
        c.tp += p && y;
        c.fp += p && !y;
        c.fn += !p && y;
    }
    return c;
}

}  // namespace

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn, double empty_value) {
    const std::size_t denom = 2 * tp + fp + fn;
    if (denom == 0) return empty_value;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double label_f1(const RealMatrix& probs, const BinaryMatrix& targets, std::size_t label, double threshold) {
    Counts c;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const bool p = probs(i, label) >= threshold;
        const bool y = targets(i, label);
        c.tp += p && y;
        c.fp += p && !y;
        c.fn += !p && y;
    }
    return f1_score(c.tp, c.fp, c.fn);
}

Thresholds tune_thresholds(const RealMatrix& probs, const BinaryMatrix& targets) {
    check_same_shape(probs.rows(), probs.cols(), targets.rows(), targets.cols());
    if (probs.rows() == 0) throw ConfigError("threshold tuning needs at least one document");

    Thresholds out;
    out.t.assign(probs.cols(), 0.5);
    std::vector<double> column;
    std::vector<double> candidates;
    for (std::size_t j = 0; j < probs.cols(); ++j) {
        bool has_positive = false;
        column.clear();
        for (std::size_t i = 0; i < probs.rows(); ++i) {
            has_positive = has_positive || targets(i, j);
            column.push_back(probs(i, j));
        }
        if (!has_positive) {
            out.untuned.push_back(j);
            continue;
        }
        std::sort(column.begin(), column.end());
        column.erase(std::unique(column.begin(), column.end()), column.end());

        candidates = {0.5};
        for (std::size_t k = 1; k < column.size(); ++k) {
            candidates.push_back(std::clamp(0.5 * (column[k - 1] + column[k]), kMinThreshold, kMaxThreshold));
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        double best = 0.5;
        double best_f1 = -1.0;
        for (double c : candidates) {
            const double f1 = label_f1(probs, targets, j, c);
            const double dist = std::abs(c - 0.5);
            const double best_dist = std::abs(best - 0.5);
            // Candidates ascend, so on equal F1 and equal distance the smaller one is kept.
            if (f1 > best_f1 || (f1 == best_f1 && dist < best_dist)) {
                best = c;
                best_f1 = f1;
            }
        }
        out.t[j] = best;
    }
    return out;
}

PredictionBatch apply_thresholds(const RealMatrix& probs, const std::vector<double>& thresholds,
                                 const LabelVocab& vocab, std::vector<std::string> doc_ids) {
    if (thresholds.size() != probs.cols() || vocab.size() != probs.cols()) {
        throw DimensionError("thresholds, vocabulary and probability columns must agree");
    }
    if (doc_ids.size() != probs.rows()) throw DimensionError("one document id per probability row is required");
    PredictionBatch batch;
    batch.probs = probs;
    batch.decisions = BinaryMatrix(probs.rows(), probs.cols(), 0);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        for (std::size_t j = 0; j < probs.cols(); ++j) batch.decisions(i, j) = probs(i, j) >= thresholds[j];
    }
    batch.vocab = vocab;
    batch.doc_ids = std::move(doc_ids);
    batch.thresholds = thresholds;
    return batch;
}

double micro_f1(const BinaryMatrix& decisions, const BinaryMatrix& targets) {
    check_same_shape(decisions.rows(), decisions.cols(), targets.rows(), targets.cols());
    Counts total;
    for (std::size_t j = 0; j < decisions.cols(); ++j) {
        const auto c = column_counts(decisions, targets, j);
        total.tp += c.tp;
        total.fp += c.fp;
        total.fn += c.fn;
    }
    return f1_score(total.tp, total.fp, total.fn);
}

double macro_f1(const BinaryMatrix& decisions, const BinaryMatrix& targets, ZeroSupport zero_support) {
    check_same_shape(decisions.rows(), decisions.cols(), targets.rows(), targets.cols());
    if (decisions.cols() == 0) return 0.0;
    const double empty = zero_support == ZeroSupport::one ? 1.0 : 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < decisions.cols(); ++j) {
        const auto c = column_counts(decisions, targets, j);
        sum += f1_score(c.tp, c.fp, c.fn, empty);
    }
    return sum / static_cast<double>(decisions.cols());
}

double hamming_loss(const BinaryMatrix& decisions, const BinaryMatrix& targets) {
    check_same_shape(decisions.rows(), decisions.cols(), targets.rows(), targets.cols());
    const std::size_t cells = decisions.rows() * decisions.cols();
    if (cells == 0) return 0.0;
    std::size_t mismatched = 0;
    for (std::size_t k = 0; k < cells; ++k) mismatched += (decisions.data()[k] != 0) != (targets.data()[k] != 0);
    return static_cast<double>(mismatched) / static_cast<double>(cells);
}

MetricsReport compute_metrics(const PredictionBatch& batch, const BinaryMatrix& targets, const RuleSet& rules,
                              ZeroSupport zero_support) {
    const auto& d = batch.decisions;
    check_same_shape(d.rows(), d.cols(), targets.rows(), targets.cols());
    MetricsReport report;
    const double empty = zero_support == ZeroSupport::one ? 1.0 : 0.0;
    double f1_sum = 0.0;
    Counts total;
    for (std::size_t j = 0; j < d.cols(); ++j) {
        const auto c = column_counts(d, targets, j);
        LabelMetrics lm;
        lm.label = batch.vocab.name(j);
        lm.tp = c.tp;
        lm.fp = c.fp;
        lm.fn = c.fn;
        lm.support = c.tp + c.fn;
        lm.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
        lm.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        lm.f1 = f1_score(c.tp, c.fp, c.fn, empty);
        f1_sum += lm.f1;
        total.tp += c.tp;
        total.fp += c.fp;
        total.fn += c.fn;
        report.per_label.push_back(std::move(lm));
    }
    report.micro_f1 = f1_score(total.tp, total.fp, total.fn);
    report.macro_f1 = d.cols() == 0 ? 0.0 : f1_sum / static_cast<double>(d.cols());
    report.hamming = hamming_loss(d, targets);
    report.consistency = audit_violations(batch, rules);
    return report;
}

std::string format_metrics_row(const MetricsReport& report) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "micro_f1=%.4f macro_f1=%.4f hamming=%.4f violations=%zu viol_per_doc=%.4f viol_per_1k=%.1f",
                  report.micro_f1, report.macro_f1, report.hamming, report.consistency.total,
                  report.consistency.per_doc, report.consistency.per_1k);
    return buf;
}

std::string metrics_report_json(const MetricsReport& report) {
    using json = nlohmann::json;
    json j;
    j["summary"] = {{"micro_f1", report.micro_f1},
                    {"macro_f1", report.macro_f1},
                    {"hamming", report.hamming},
                    {"violations", report.consistency.total},
                    {"viol_per_doc", report.consistency.per_doc},
                    {"viol_per_1k", report.consistency.per_1k}};
    j["violation_rate_percent"] = report.consistency.rate_percent;
    j["per_label"] = json::array();
    for (const auto& l : report.per_label) {
        j["per_label"].push_back({{"label", l.label},
                                  {"tp", l.tp},
                                  {"fp", l.fp},
                                  {"fn", l.fn},
                                  {"support", l.support},
                                  {"precision", l.precision},
                                  {"recall", l.recall},
                                  {"f1", l.f1}});
    }
    j["consistency"] = json::parse(violation_report_json(report.consistency));
    return j.dump(2) + "\n";
}

}  // namespace nasp

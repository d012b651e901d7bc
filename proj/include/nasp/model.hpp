#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nasp/corpus.hpp"
#include "nasp/eval.hpp"
#include "nasp/features.hpp"
#include "nasp/matrix.hpp"
#include "nasp/rules.hpp"

namespace nasp {

/// Lower clamp applied to probabilities before taking logs.
inline constexpr double kProbEpsilon = 1e-7;

struct ClassWeights {
    std::vector<double> w;
};

struct ClassWeightOptions {
    /// Upper clamp; nullopt leaves the ratio unbounded above.
    std::optional<double> cap = 100.0;
    double floor = 1e-3;
};

/// w_j = n_neg,j / (n_pos,j + 1e-5), clamped to [floor, cap].
ClassWeights compute_class_weights(const Dataset& dataset, const ClassWeightOptions& options = {});
ClassWeights compute_class_weights(const BinaryMatrix& targets, const ClassWeightOptions& options = {});

/// Sparse-input linear multi-label classifier: z = W x + b, p = sigmoid(z).
struct Model {
    RealMatrix weights;  ///< m x d
    std::vector<double> bias;
    LabelVocab vocab;
    std::string vectorizer_ref;

    Model() = default;
    Model(LabelVocab labels, std::size_t dim, std::string vectorizer_fingerprint);

    std::size_t num_labels() const noexcept { return weights.rows(); }
    std::size_t dim() const noexcept { return weights.cols(); }
    bool operator==(const Model&) const = default;
};

/// Numerically stable logistic function.
double sigmoid(double z);

struct Forward {
    std::vector<double> logits;
    std::vector<double> probs;
};

Forward forward(const Model& model, const FeatureVector& x);
/// Probabilities for many inputs, one row per input.
RealMatrix predict_probs(const Model& model, std::span<const FeatureVector> xs);

struct BceResult {
    double loss = 0.0;
    std::vector<double> grad_logits;
};

/// Per-sample weighted BCE over all labels and its gradient w.r.t. logits,
/// (1 - y) p - w y (1 - p), with p clamped to [eps, 1 - eps].
BceResult bce_loss(std::span<const double> probs, std::span<const std::uint8_t> targets, const ClassWeights& weights);

struct FuzzyResult {
    double loss = 0.0;
    RealMatrix grad_probs;  ///< B x m
};

/// beta / |R| * sum_rules w * mean_i max(0, p_ia - p_ib) over a batch of
/// probability rows, with the subgradient w.r.t. probabilities (0 on the kink).
/// An empty rule set gives 0.
FuzzyResult fuzzy_loss(const RealMatrix& probs, std::span<const IndexedRule> rules, double beta);
FuzzyResult fuzzy_loss(const RealMatrix& probs, const RuleSet& rules, const LabelVocab& vocab, double beta);

/// The fuzzy term already carries beta.
inline double total_loss(double bce, double fuzzy) { return bce + fuzzy; }

enum class StopMetric { micro_f1, macro_f1 };

struct TrainConfig {
    double beta = 0.0;
    double learning_rate = 5e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::size_t early_stop_patience = 5;
    std::uint64_t seed = 0;
    double l2 = 1e-6;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    ClassWeightOptions class_weights;
    StopMetric stop_metric = StopMetric::micro_f1;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

struct EpochLog {
    std::size_t epoch = 0;
    double bce = 0.0;
    double fuzzy = 0.0;
    double total = 0.0;
    double val_micro_f1 = 0.0;
    double val_macro_f1 = 0.0;
    std::size_t val_violations = 0;
};

struct TrainLog {
    std::vector<EpochLog> epochs;
    std::size_t best_epoch = 0;
    /// Full-training-set objective (mean BCE + fuzzy) before the first step
    /// and at the returned checkpoint.
    double initial_loss = 0.0;
    double best_loss = 0.0;
    std::vector<std::string> warnings;
};

struct TrainResult {
    Model model;
    TrainLog log;
};

/// Mini-batch Adam on the combined objective with seeded shuffling, early
/// stopping on validation F1 at threshold 0.5; returns the best checkpoint.
/// Both datasets must share one vocabulary.
TrainResult train(const Dataset& train_set, const Dataset& val_set, const RuleSet& rules,
                  const Vectorizer& vectorizer, const TrainConfig& config);

/// Everything a later `evaluate` needs besides the vectorizer.
struct Checkpoint {
    Model model;
    TrainConfig config;
    TrainLog log;
    std::vector<double> thresholds;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace nasp

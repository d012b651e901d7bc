#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nasp/asp.hpp"
#include "nasp/error.hpp"
#include "nasp/eval.hpp"
#include "nasp/model.hpp"
#include "nasp/random.hpp"

namespace nasp {

namespace {

struct Objective {
    double bce = 0.0;
    double fuzzy = 0.0;
};

// Mean BCE plus the fuzzy term over a whole split, evaluated as one batch.
Objective full_objective(const Model& model, const std::vector<FeatureVector>& xs, const BinaryMatrix& y,
                         const ClassWeights& cw, std::span<const IndexedRule> rules, double beta, bool use_fuzzy) {
    const auto probs = predict_probs(model, xs);
    Objective o;
    for (std::size_t i = 0; i < xs.size(); ++i) o.bce += bce_loss(probs.row(i), y.row(i), cw).loss;
    o.bce /= static_cast<double>(xs.size());
#ifndef NASP_WITHOUT_FUZZY
    if (use_fuzzy) o.fuzzy = fuzzy_loss(probs, rules, beta).loss;
#else
    (void)rules, (void)beta, (void)use_fuzzy;
#endif
    return o;
}

// Adam state for one flat parameter block.
struct AdamBlock {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamBlock(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad, const TrainConfig& c, double correction1,
              double correction2) {
        for (std::size_t k = 0; k < params.size(); ++k) {
            m[k] = c.adam_beta1 * m[k] + (1.0 - c.adam_beta1) * grad[k];
            v[k] = c.adam_beta2 * v[k] + (1.0 - c.adam_beta2) * grad[k] * grad[k];
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            params[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.adam_epsilon);
        }
    }
};

std::string diagnostics(std::size_t epoch, std::size_t batch, double bce, double fuzzy) {
    std::ostringstream msg;
    msg << "non-finite loss at epoch " << epoch << ", batch " << batch << " (bce=" << bce << ", fuzzy=" << fuzzy
        << "); try a smaller learning rate";
    return msg.str();
}

}  // namespace

TrainResult train(const Dataset& train_set, const Dataset& val_set, const RuleSet& rules,
                  const Vectorizer& vectorizer, const TrainConfig& config) {
    config.validate();
    if (train_set.size() == 0) throw Error("empty dataset");
    if (val_set.size() == 0) throw Error("empty validation dataset");
    if (!(train_set.vocab == val_set.vocab)) throw ConfigError("training and validation vocabularies differ");

    const auto& vocab = train_set.vocab;
    const std::size_t m = vocab.size();
    const std::size_t d = vectorizer.dim();
    const auto indexed = index_rules(rules, vocab);

    TrainResult result;
    auto& log = result.log;
    if (config.beta > 0.0 && indexed.empty()) {
        log.warnings.push_back("fuzzy weight is set but the rule set is empty; the fuzzy term is 0");
    }
    // With beta == 0 the fuzzy term is never computed. NASP_WITHOUT_FUZZY
    // compiles it out entirely, for the ablation build.
    const bool use_fuzzy = config.beta > 0.0 && !indexed.empty();

    const auto x_train = vectorize_all(train_set.texts(), vectorizer);
    const auto y_train = train_set.targets();
    const auto x_val = vectorize_all(val_set.texts(), vectorizer);
    const auto y_val = val_set.targets();
    const auto cw = compute_class_weights(y_train, config.class_weights);
    std::vector<std::string> val_ids;
    for (const auto& r : val_set.records) val_ids.push_back(r.id);

    Model model(vocab, d, vectorizer.fingerprint());
    Model best = model;
    {
        const auto o = full_objective(model, x_train, y_train, cw, indexed, config.beta, use_fuzzy);
        log.initial_loss = total_loss(o.bce, o.fuzzy);
    }

    AdamBlock adam_w(m * d);
    AdamBlock adam_b(m);
    std::vector<double> grad_w(m * d);
    std::vector<double> grad_b(m);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed);
    std::size_t step = 0;
    double best_score = -1.0;
    std::size_t since_best = 0;
    const std::vector<double> half(m, 0.5);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        double bce_sum = 0.0;
        double fuzzy_sum = 0.0;
        std::size_t batches = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::size_t b = end - start;
            const double inv_b = 1.0 / static_cast<double>(b);

            RealMatrix probs(b, m);
            for (std::size_t r = 0; r < b; ++r) {
                const auto f = forward(model, x_train[order[start + r]]);
                std::copy(f.probs.begin(), f.probs.end(), probs.row(r).begin());
            }

            RealMatrix grad_z(b, m);
            double bce = 0.0;
            for (std::size_t r = 0; r < b; ++r) {
                auto res = bce_loss(probs.row(r), y_train.row(order[start + r]), cw);
                bce += res.loss;
                for (std::size_t j = 0; j < m; ++j) grad_z(r, j) = res.grad_logits[j] * inv_b;
            }
            bce *= inv_b;

            double fuzzy = 0.0;
#ifndef NASP_WITHOUT_FUZZY
            if (use_fuzzy) {
                auto fr = fuzzy_loss(probs, indexed, config.beta);
                fuzzy = fr.loss;
                for (std::size_t r = 0; r < b; ++r) {
                    for (std::size_t j = 0; j < m; ++j) {
                        const double p = probs(r, j);
                        grad_z(r, j) += fr.grad_probs(r, j) * p * (1.0 - p);
                    }
                }
            }
#endif
            if (!std::isfinite(bce) || !std::isfinite(fuzzy)) {
                throw TrainingError(diagnostics(epoch, batches + 1, bce, fuzzy));
            }

            const auto& w = model.weights.data();
            for (std::size_t k = 0; k < grad_w.size(); ++k) grad_w[k] = config.l2 * w[k];
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            for (std::size_t r = 0; r < b; ++r) {
                const auto& x = x_train[order[start + r]];
                for (std::size_t j = 0; j < m; ++j) {
                    const double g = grad_z(r, j);
                    if (g == 0.0) continue;
                    grad_b[j] += g;
                    double* row = grad_w.data() + j * d;
                    for (std::size_t k = 0; k < x.indices.size(); ++k) row[x.indices[k]] += g * x.values[k];
                }
            }

            ++step;
            const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
            adam_w.step(model.weights.data(), grad_w, config, c1, c2);
            adam_b.step(model.bias, grad_b, config, c1, c2);

            bce_sum += bce;
            fuzzy_sum += fuzzy;
            ++batches;
        }

        EpochLog e;
        e.epoch = epoch;
        e.bce = bce_sum / static_cast<double>(batches);
        e.fuzzy = fuzzy_sum / static_cast<double>(batches);
        e.total = total_loss(e.bce, e.fuzzy);

        const auto val_probs = predict_probs(model, x_val);
        const auto batch = apply_thresholds(val_probs, half, vocab, val_ids);
        e.val_micro_f1 = micro_f1(batch.decisions, y_val);
        e.val_macro_f1 = macro_f1(batch.decisions, y_val);
        e.val_violations = audit_violations(batch, rules).total;
        log.epochs.push_back(e);

        for (double v : model.weights.data()) {
            if (!std::isfinite(v)) throw TrainingError("non-finite weights after epoch " + std::to_string(epoch));
        }

        const double score = config.stop_metric == StopMetric::micro_f1 ? e.val_micro_f1 : e.val_macro_f1;
        if (score > best_score) {
            best_score = score;
            best = model;
            log.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.early_stop_patience) {
            break;
        }
    }

    const auto o = full_objective(best, x_train, y_train, cw, indexed, config.beta, use_fuzzy);
    log.best_loss = total_loss(o.bce, o.fuzzy);
    result.model = std::move(best);
    return result;
}

}  // namespace nasp

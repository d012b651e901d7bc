#include "nasp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "nasp/error.hpp"

namespace nasp {

using json = nlohmann::json;

ClassWeights compute_class_weights(const BinaryMatrix& targets, const ClassWeightOptions& options) {
    ClassWeights cw;
    const std::size_t n = targets.rows();
    for (std::size_t j = 0; j < targets.cols(); ++j) {
        std::size_t pos = 0;
        for (std::size_t i = 0; i < n; ++i) pos += targets(i, j) != 0;
        const double neg = static_cast<double>(n - pos);
        double w = neg / (static_cast<double>(pos) + 1e-5);
        w = std::max(w, options.floor);
        if (options.cap) w = std::min(w, *options.cap);
        cw.w.push_back(w);
    }
    return cw;
}

ClassWeights compute_class_weights(const Dataset& dataset, const ClassWeightOptions& options) {
    return compute_class_weights(dataset.targets(), options);
}

Model::Model(LabelVocab labels, std::size_t dim, std::string vectorizer_fingerprint)
    : weights(labels.size(), dim, 0.0),
      bias(labels.size(), 0.0),
      vocab(std::move(labels)),
      vectorizer_ref(std::move(vectorizer_fingerprint)) {}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Forward forward(const Model& model, const FeatureVector& x) {
    if (x.dim != model.dim()) {
        throw DimensionError("feature dimension " + std::to_string(x.dim) + " does not match model dimension " +
                             std::to_string(model.dim()));
    }
    Forward out;
    out.logits = model.bias;
    out.probs.resize(model.num_labels());
    for (std::size_t j = 0; j < model.num_labels(); ++j) {
        const auto w = model.weights.row(j);
        double z = out.logits[j];
        for (std::size_t k = 0; k < x.indices.size(); ++k) z += w[x.indices[k]] * x.values[k];
        out.logits[j] = z;
        out.probs[j] = sigmoid(z);
    }
    return out;
}

RealMatrix predict_probs(const Model& model, std::span<const FeatureVector> xs) {
    RealMatrix probs(xs.size(), model.num_labels());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto f = forward(model, xs[i]);
        std::copy(f.probs.begin(), f.probs.end(), probs.row(i).begin());
    }
    return probs;
}

BceResult bce_loss(std::span<const double> probs, std::span<const std::uint8_t> targets, const ClassWeights& weights) {
    if (probs.size() != targets.size() || probs.size() != weights.w.size()) {
        throw DimensionError("probabilities, targets and class weights must have the same length");
    }
    BceResult r;
    r.grad_logits.resize(probs.size());
    for (std::size_t j = 0; j < probs.size(); ++j) {
        const double p = std::clamp(probs[j], kProbEpsilon, 1.0 - kProbEpsilon);
        const double y = targets[j] ? 1.0 : 0.0;
        const double w = weights.w[j];
        r.loss -= w * y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        r.grad_logits[j] = (1.0 - y) * p - w * y * (1.0 - p);
    }
    return r;
}

FuzzyResult fuzzy_loss(const RealMatrix& probs, std::span<const IndexedRule> rules, double beta) {
    FuzzyResult r;
    r.grad_probs = RealMatrix(probs.rows(), probs.cols(), 0.0);
    if (rules.empty() || probs.rows() == 0) return r;
    const double batch = static_cast<double>(probs.rows());
    const double num_rules = static_cast<double>(rules.size());
    for (const auto& rule : rules) {
        if (rule.premise >= probs.cols() || rule.conclusion >= probs.cols()) {
            throw DimensionError("rule label index outside the probability columns");
        }
        double gap_sum = 0.0;
        const double g = beta * (rule.weight / (num_rules * batch));
        for (std::size_t i = 0; i < probs.rows(); ++i) {
            const double gap = probs(i, rule.premise) - probs(i, rule.conclusion);
            if (gap > 0.0) {
                gap_sum += gap;
                r.grad_probs(i, rule.premise) += g;
                r.grad_probs(i, rule.conclusion) -= g;
            }
        }
        r.loss += rule.weight * (gap_sum / batch);
    }
    // beta is applied last so the loss is exactly linear in it.
    r.loss = beta * (r.loss / num_rules);
    return r;
}

FuzzyResult fuzzy_loss(const RealMatrix& probs, const RuleSet& rules, const LabelVocab& vocab, double beta) {
    const auto indexed = index_rules(rules, vocab);
    return fuzzy_loss(probs, indexed, beta);
}

void TrainConfig::validate() const {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a finite value >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (early_stop_patience == 0) throw ConfigError("early_stop_patience must be >= 1");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
    if (class_weights.cap && !(*class_weights.cap >= class_weights.floor)) {
        throw ConfigError("class weight cap must be >= floor");
    }
}

namespace {

constexpr int kCheckpointVersion = 1;

json config_to_json(const TrainConfig& c) {
    return {{"beta", c.beta},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"early_stop_patience", c.early_stop_patience},
            {"seed", c.seed},
            {"l2", c.l2},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_epsilon", c.adam_epsilon},
            {"class_weight_cap", c.class_weights.cap ? json(*c.class_weights.cap) : json(nullptr)},
            {"class_weight_floor", c.class_weights.floor},
            {"stop_metric", c.stop_metric == StopMetric::micro_f1 ? "micro_f1" : "macro_f1"}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.beta = j.at("beta").get<double>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.early_stop_patience = j.at("early_stop_patience").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.l2 = j.at("l2").get<double>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_epsilon = j.at("adam_epsilon").get<double>();
    const auto& cap = j.at("class_weight_cap");
    c.class_weights.cap = cap.is_null() ? std::nullopt : std::optional<double>(cap.get<double>());
    c.class_weights.floor = j.at("class_weight_floor").get<double>();
    c.stop_metric = j.at("stop_metric").get<std::string>() == "macro_f1" ? StopMetric::macro_f1 : StopMetric::micro_f1;
    return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    json j;
    j["format"] = "nasp-checkpoint";
    j["version"] = kCheckpointVersion;
    j["labels"] = ck.model.vocab.labels();
    j["dim"] = ck.model.dim();
    j["vectorizer_ref"] = ck.model.vectorizer_ref;
    j["bias"] = ck.model.bias;
    j["weights"] = ck.model.weights.data();
    j["thresholds"] = ck.thresholds;
    j["config"] = config_to_json(ck.config);

    json log;
    log["best_epoch"] = ck.log.best_epoch;
    log["initial_loss"] = ck.log.initial_loss;
    log["best_loss"] = ck.log.best_loss;
    log["warnings"] = ck.log.warnings;
    log["epochs"] = json::array();
    for (const auto& e : ck.log.epochs) {
        log["epochs"].push_back({{"epoch", e.epoch},
                                 {"bce", e.bce},
                                 {"fuzzy", e.fuzzy},
                                 {"total", e.total},
                                 {"val_micro_f1", e.val_micro_f1},
                                 {"val_macro_f1", e.val_macro_f1},
                                 {"val_violations", e.val_violations}});
    }
    j["train_log"] = std::move(log);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid checkpoint: ") + e.what());
    }
    if (j.value("format", "") != "nasp-checkpoint" || j.value("version", 0) != kCheckpointVersion) {
        throw ParseError("unsupported checkpoint " + path.string());
    }
    Checkpoint ck;
    ck.model = Model(LabelVocab(j.at("labels").get<std::vector<std::string>>()), j.at("dim").get<std::size_t>(),
                     j.at("vectorizer_ref").get<std::string>());
    auto weights = j.at("weights").get<std::vector<double>>();
    auto bias = j.at("bias").get<std::vector<double>>();
    if (weights.size() != ck.model.weights.data().size() || bias.size() != ck.model.bias.size()) {
        throw DimensionError("checkpoint parameter shapes do not match its labels and dimension");
    }
    ck.model.weights.data() = std::move(weights);
    ck.model.bias = std::move(bias);
    for (double v : ck.model.weights.data()) {
        if (!std::isfinite(v)) throw ParseError("checkpoint contains non-finite weights");
    }
    ck.thresholds = j.at("thresholds").get<std::vector<double>>();
    ck.config = config_from_json(j.at("config"));

    const auto& log = j.at("train_log");
    ck.log.best_epoch = log.at("best_epoch").get<std::size_t>();
    ck.log.initial_loss = log.at("initial_loss").get<double>();
    ck.log.best_loss = log.at("best_loss").get<double>();
    ck.log.warnings = log.at("warnings").get<std::vector<std::string>>();
    for (const auto& e : log.at("epochs")) {
        ck.log.epochs.push_back({e.at("epoch").get<std::size_t>(), e.at("bce").get<double>(),
                                 e.at("fuzzy").get<double>(), e.at("total").get<double>(),
                                 e.at("val_micro_f1").get<double>(), e.at("val_macro_f1").get<double>(),
                                 e.at("val_violations").get<std::size_t>()});
    }
    return ck;
}

}  // namespace nasp

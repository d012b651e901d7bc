// nasp: command-line driver for the rule-constrained multi-label pipeline.
//
//   synth       generate a synthetic corpus with planted implication rules
//   split       seeded train/validation/test partition
//   mine-rules  mine soft implication rules from a training split
//   emit-asp    write the rules as a Clingo program with weak constraints
//   augment     add rule-completed copies of training records
//   train       fit the vectorizer and the classifier, tune thresholds
//   evaluate    score a trained model on a test split and audit violations
//   audit       audit saved predictions, optionally cross-checked by clingo
//
// Every subcommand writes into --out-dir, together with config.toml (the
// resolved options) and run.log.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nasp/asp.hpp"
#include "nasp/augment.hpp"
#include "nasp/corpus.hpp"
#include "nasp/error.hpp"
#include "nasp/eval.hpp"
#include "nasp/features.hpp"
#include "nasp/model.hpp"
#include "nasp/prediction.hpp"
#include "nasp/rules.hpp"
#include "nasp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace nasp;

namespace {

class RunLog {
public:
    explicit RunLog(const fs::path& dir) : file_(dir / "run.log", std::ios::binary) {}

    void info(const std::string& message) {
        std::cerr << message << '\n';
        file_ << message << '\n';
    }

private:
    std::ofstream file_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void require_file(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw Error("missing file " + path.string());
}

struct Options {
    std::string out_dir;
    std::uint64_t seed = 0;

    // synth
    std::size_t records = 1000;
    std::size_t labels = 4;
    std::vector<std::string> planted = {"L0:L1"};
    double noise = 0.1;
    SyntheticOptions synthetic;

    // split
    std::string data;
    double train_ratio = 0.8;
    double val_ratio = 0.1;

    // mine-rules / augment / train / audit
    std::string train;
    std::string val;
    std::string test;
    std::string rules;
    std::string expert_rules;
    double min_support = 0.01;
    double min_confidence = 0.7;
    double max_growth = -1.0;
    bool closure = false;

    // train
    double beta = 0.0;
    double learning_rate = 5e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::size_t patience = 5;
    double l2 = 1e-6;
    double class_weight_cap = 100.0;
    std::string stop_metric = "micro";
    std::size_t min_token_freq = 1;
    std::size_t max_features = 20000;
    bool tune = true;

    // evaluate / audit
    std::string model_dir;
    std::string zero_support = "one";
    std::string predictions;
    std::string clingo_path;
};

RuleSet planted_rules(const std::vector<std::string>& specs) {
    std::vector<Rule> rules;
    for (const auto& spec : specs) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw ConfigError("planted rule \"" + spec + "\" must look like L0:L1");
        rules.push_back(Rule{spec.substr(0, colon), spec.substr(colon + 1), 1.0, std::nullopt, RuleOrigin::expert});
    }
    return RuleSet(std::move(rules));
}

void run_synth(const Options& o, RunLog& log) {
    const auto rules = planted_rules(o.planted);
    const auto ds = generate_synthetic(o.records, o.labels, rules, o.noise, o.seed, o.synthetic);
    save_dataset(fs::path(o.out_dir) / "dataset.jsonl", ds);
    save_rules(fs::path(o.out_dir) / "planted_rules.txt", rules);
    log.info("synth: " + std::to_string(ds.size()) + " records, " + std::to_string(ds.vocab.size()) + " labels");
}

void run_split(const Options& o, RunLog& log) {
    require_file(o.data);
    const auto ds = load_dataset(o.data);
    if (ds.duplicate_label_warnings) {
        log.info("warning: dropped " + std::to_string(ds.duplicate_label_warnings) + " duplicate labels");
    }
    const auto parts = split_dataset(ds, {o.train_ratio, o.val_ratio}, o.seed);
    const fs::path dir(o.out_dir);
    save_dataset(dir / "train.jsonl", parts.train);
    save_dataset(dir / "val.jsonl", parts.validation);
    save_dataset(dir / "test.jsonl", parts.test);
    log.info("split: train=" + std::to_string(parts.train.size()) + " val=" + std::to_string(parts.validation.size()) +
             " test=" + std::to_string(parts.test.size()));
}

void run_mine(const Options& o, RunLog& log) {
    require_file(o.train);
    const auto ds = load_dataset(o.train);
    auto rules = mine_rules(ds, o.min_support, o.min_confidence);
    log.info("mine-rules: " + std::to_string(rules.size()) + " rules mined");
    if (!o.expert_rules.empty()) {
        require_file(o.expert_rules);
        rules = merge_rules(rules, load_rules(o.expert_rules, RuleOrigin::expert));
        log.info("mine-rules: " + std::to_string(rules.size()) + " rules after merging expert rules");
    }
    save_rules(fs::path(o.out_dir) / "rules.txt", rules);

    const auto report = validate_ruleset(rules, ds.vocab);
    nlohmann::json j;
    j["unknown_labels"] = nlohmann::json::array();
    for (const auto& u : report.unknown_labels) {
        j["unknown_labels"].push_back({{"rule", u.rule_index}, {"label", u.label}});
    }
    j["cycles"] = report.cycles;
    j["cycles_truncated"] = report.cycles_truncated;
    write_text(fs::path(o.out_dir) / "validation.json", j.dump(2) + "\n");
    for (const auto& u : report.unknown_labels) log.info("warning: rule label \"" + u.label + "\" is not a known label");
    if (!report.cycles.empty()) log.info("note: " + std::to_string(report.cycles.size()) + " rule cycles");
}

void run_emit(const Options& o, RunLog& log) {
    require_file(o.rules);
    const auto rules = load_rules(o.rules);
    save_program(fs::path(o.out_dir) / "program.lp", emit_weak_constraints(rules));
    log.info("emit-asp: " + std::to_string(rules.size()) + " weak constraints");
}

void run_augment(const Options& o, RunLog& log) {
    require_file(o.train);
    require_file(o.rules);
    const auto ds = load_dataset(o.train);
    AugmentOptions opts;
    opts.closure = o.closure;
    if (o.max_growth >= 0.0) opts.max_growth = o.max_growth;
    const auto aug = augment_dataset(ds, load_rules(o.rules), opts);
    save_dataset(fs::path(o.out_dir) / "train_aug.jsonl", aug.dataset);
    write_text(fs::path(o.out_dir) / "augment_summary.json", augmentation_summary_json(aug.summary));
    char buf[128];
    std::snprintf(buf, sizeof buf, "augment: added %zu records (%.2f%% growth)", aug.summary.added,
                  aug.summary.growth_percent);
    log.info(buf);
}

StopMetric parse_stop_metric(const std::string& s) {
    if (s == "micro") return StopMetric::micro_f1;
    if (s == "macro") return StopMetric::macro_f1;
    throw ConfigError("--stop-metric must be micro or macro");
}

void run_train(const Options& o, RunLog& log) {
    for (const auto* p : {&o.train, &o.val, &o.rules}) require_file(*p);
    auto train_ds = load_dataset(o.train, std::nullopt, Split::train);
    auto val_ds = load_dataset(o.val, std::nullopt, Split::validation);
    auto names = train_ds.vocab.labels();
    names.insert(names.end(), val_ds.vocab.labels().begin(), val_ds.vocab.labels().end());
    const LabelVocab vocab(names);
    train_ds.vocab = vocab;
    val_ds.vocab = vocab;
    const auto rules = load_rules(o.rules);

    TrainConfig config;
    config.beta = o.beta;
    config.learning_rate = o.learning_rate;
    config.epochs = o.epochs;
    config.batch_size = o.batch_size;
    config.early_stop_patience = o.patience;
    config.seed = o.seed;
    config.l2 = o.l2;
    if (o.class_weight_cap > 0.0) {
        config.class_weights.cap = o.class_weight_cap;
    } else {
        config.class_weights.cap.reset();
    }
    config.stop_metric = parse_stop_metric(o.stop_metric);

    VectorizerConfig vc;
    vc.min_token_freq = o.min_token_freq;
    vc.max_features = o.max_features;
    const auto vectorizer = fit_vectorizer(train_ds.texts(), vc);
    log.info("train: " + std::to_string(train_ds.size()) + " records, " + std::to_string(vectorizer.dim()) +
             " features, " + std::to_string(vocab.size()) + " labels, " + std::to_string(rules.size()) + " rules");

    auto result = train(train_ds, val_ds, rules, vectorizer, config);
    for (const auto& w : result.log.warnings) log.info("warning: " + w);
    for (const auto& e : result.log.epochs) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "epoch %zu bce=%.6f fuzzy=%.6f total=%.6f val_micro_f1=%.4f val_violations=%zu",
                      e.epoch, e.bce, e.fuzzy, e.total, e.val_micro_f1, e.val_violations);
        log.info(buf);
    }
    log.info("train: best epoch " + std::to_string(result.log.best_epoch));

    Checkpoint ck;
    ck.model = std::move(result.model);
    ck.config = config;
    ck.log = std::move(result.log);
    ck.thresholds.assign(vocab.size(), 0.5);
    if (o.tune) {
        const auto val_probs = predict_probs(ck.model, vectorize_all(val_ds.texts(), vectorizer));
        auto tuned = tune_thresholds(val_probs, val_ds.targets());
        for (auto j : tuned.untuned) {
            log.info("note: label \"" + vocab.name(j) + "\" has no validation positives; threshold stays 0.5");
        }
        ck.thresholds = std::move(tuned.t);
    }

    const fs::path dir(o.out_dir);
    save_vectorizer(dir / "vectorizer.json", vectorizer);
    save_checkpoint(dir / "model.json", ck);
    save_rules(dir / "rules.txt", rules);
}

ZeroSupport parse_zero_support(const std::string& s) {
    if (s == "one") return ZeroSupport::one;
    if (s == "zero") return ZeroSupport::zero;
    throw ConfigError("--zero-support must be one or zero");
}

void run_evaluate(const Options& o, RunLog& log) {
    const fs::path model_dir(o.model_dir);
    const auto rules_path = o.rules.empty() ? model_dir / "rules.txt" : fs::path(o.rules);
    for (const auto& p : {model_dir / "model.json", model_dir / "vectorizer.json", rules_path, fs::path(o.test)}) {
        require_file(p);
    }
    const auto ck = load_checkpoint(model_dir / "model.json");
    const auto vectorizer = load_vectorizer(model_dir / "vectorizer.json");
    if (vectorizer.fingerprint() != ck.model.vectorizer_ref) {
        throw ConfigError("vectorizer does not match the one the model was trained with");
    }
    const auto rules = load_rules(rules_path);
    const auto test_ds = load_dataset(o.test, ck.model.vocab, Split::test);

    std::vector<std::string> ids;
    for (const auto& r : test_ds.records) ids.push_back(r.id);
    const auto probs = predict_probs(ck.model, vectorize_all(test_ds.texts(), vectorizer));
    const auto batch = apply_thresholds(probs, ck.thresholds, ck.model.vocab, std::move(ids));
    const auto report = compute_metrics(batch, test_ds.targets(), rules, parse_zero_support(o.zero_support));

    const fs::path dir(o.out_dir);
    save_predictions(dir / "predictions.json", batch);
    write_text(dir / "metrics.json", metrics_report_json(report));
    write_text(dir / "violations.json", violation_report_json(report.consistency));
    log.info("evaluate: " + format_metrics_row(report));
    std::cout << format_metrics_row(report) << '\n';
}

void run_audit(const Options& o, RunLog& log) {
    require_file(o.predictions);
    require_file(o.rules);
    const auto batch = load_predictions(o.predictions);
    const auto rules = load_rules(o.rules);
    const auto report = audit_violations(batch, rules);
    const fs::path dir(o.out_dir);
    write_text(dir / "violations.json", violation_report_json(report));
    log.info("audit: " + format_violation_summary(report));
    std::cout << format_violation_summary(report) << '\n';

    if (!o.clingo_path.empty()) {
        const auto check = cross_check_with_clingo(o.clingo_path, batch, rules, dir / "clingo");
        nlohmann::json j;
        j["documents"] = check.documents;
        j["mismatches"] = check.mismatches;
        j["diagnostics"] = check.diagnostics;
        write_text(dir / "clingo_check.json", j.dump(2) + "\n");
        for (const auto& d : check.diagnostics) log.info("mismatch: " + d);
        if (!check.agrees()) throw Error("clingo disagrees with the auditor on " + std::to_string(check.mismatches) +
                                         " (document, rule) pairs");
        log.info("audit: clingo agrees on all " + std::to_string(check.documents) + " documents");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rule-constrained multi-label classification pipeline"};
    app.set_config("--config", "", "TOML/INI file with option values");
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out-dir", o.out_dir, "Output directory")->required();
        sub->add_option("--seed", o.seed, "Seed for all randomness")->capture_default_str();
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted rules");
    common(synth);
    synth->add_option("--records", o.records)->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--labels", o.labels)->capture_default_str()->check(CLI::Range(2, 100000));
    synth->add_option("--rule", o.planted, "Planted rule premise:conclusion, e.g. L0:L1")->capture_default_str();
    synth->add_option("--noise", o.noise)->capture_default_str()->check(CLI::Range(0.0, 0.4999999));
    synth->add_option("--base-rate", o.synthetic.base_rate)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    synth->add_option("--token-dropout", o.synthetic.token_dropout)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    synth->add_option("--tokens-per-label", o.synthetic.tokens_per_label)->capture_default_str();
    synth->add_option("--filler-tokens", o.synthetic.filler_tokens)->capture_default_str();

    auto* split = app.add_subcommand("split", "Seeded train/validation/test partition");
    common(split);
    split->add_option("--data", o.data)->required();
    split->add_option("--train-ratio", o.train_ratio)->capture_default_str();
    split->add_option("--val-ratio", o.val_ratio)->capture_default_str();

    auto* mine = app.add_subcommand("mine-rules", "Mine soft implication rules");
    common(mine);
    mine->add_option("--train", o.train)->required();
    mine->add_option("--min-support", o.min_support)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    mine->add_option("--min-confidence", o.min_confidence)->capture_default_str()->check(CLI::Range(1e-12, 1.0));
    mine->add_option("--expert-rules", o.expert_rules, "Expert rules; their weights win on conflict");

    auto* emit = app.add_subcommand("emit-asp", "Write rules as a Clingo program");
    common(emit);
    emit->add_option("--rules", o.rules)->required();

    auto* augment = app.add_subcommand("augment", "Add rule-completed copies of training records");
    common(augment);
    augment->add_option("--train", o.train)->required();
    augment->add_option("--rules", o.rules)->required();
    augment->add_option("--max-growth", o.max_growth, "Cap on additions as a fraction of the input size");
    augment->add_flag("--closure", o.closure, "Apply rule chains to fixpoint");

    auto* trn = app.add_subcommand("train", "Fit vectorizer and classifier");
    common(trn);
    trn->add_option("--train", o.train)->required();
    trn->add_option("--val", o.val)->required();
    trn->add_option("--rules", o.rules)->required();
    trn->add_option("--beta", o.beta, "Fuzzy rule loss weight, e.g. 0.1, 0.5, 0.9")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    trn->add_option("--lr", o.learning_rate)->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--epochs", o.epochs)->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--batch-size", o.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--patience", o.patience)->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--l2", o.l2)->capture_default_str()->check(CLI::NonNegativeNumber);
    trn->add_option("--class-weight-cap", o.class_weight_cap, "Upper clamp on class weights; 0 disables")
        ->capture_default_str();
    trn->add_option("--stop-metric", o.stop_metric)->capture_default_str()->check(CLI::IsMember({"micro", "macro"}));
    trn->add_option("--min-token-freq", o.min_token_freq)->capture_default_str();
    trn->add_option("--max-features", o.max_features)->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_flag("!--no-tune-thresholds", o.tune, "Keep every threshold at 0.5");

    auto* evaluate = app.add_subcommand("evaluate", "Score a trained model and audit rule violations");
    common(evaluate);
    evaluate->add_option("--model-dir", o.model_dir)->required();
    evaluate->add_option("--test", o.test)->required();
    evaluate->add_option("--rules", o.rules, "Override the rules stored with the model");
    evaluate->add_option("--zero-support", o.zero_support, "Macro-F1 value for labels never seen nor predicted")
        ->capture_default_str()
        ->check(CLI::IsMember({"one", "zero"}));

    auto* audit = app.add_subcommand("audit", "Audit saved predictions against rules");
    common(audit);
    audit->add_option("--predictions", o.predictions)->required();
    audit->add_option("--rules", o.rules)->required();
    audit->add_option("--clingo-path", o.clingo_path, "Cross-check every document with this clingo binary");

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(o.out_dir);
        auto* sub = app.get_subcommands().front();
        const auto name = sub->get_name();
        write_text(fs::path(o.out_dir) / "config.toml", "[" + name + "]\n" + sub->config_to_str(true, false));
        RunLog log(o.out_dir);
        if (name == "synth") run_synth(o, log);
        else if (name == "split") run_split(o, log);
        else if (name == "mine-rules") run_mine(o, log);
        else if (name == "emit-asp") run_emit(o, log);
        else if (name == "augment") run_augment(o, log);
        else if (name == "train") run_train(o, log);
        else if (name == "evaluate") run_evaluate(o, log);
        else if (name == "audit") run_audit(o, log);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

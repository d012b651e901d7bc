#include <doctest.h>

#include "fixtures.hpp"
#include "nasp/asp.hpp"
#include "nasp/error.hpp"
#include "nasp/model.hpp"
#include "nasp/synthetic.hpp"

using namespace nasp;

namespace {

struct Fixture {
    DatasetSplits splits;
    RuleSet rules;
    Vectorizer vectorizer;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture out;
        const auto ds = generate_synthetic(1000, 4, testing::one_rule("L0", "L1"), 0.1, 7);
        out.splits = split_dataset(ds, {0.6, 0.2}, 7);
        out.rules = mine_rules(out.splits.train, 0.01, 0.7);
        out.vectorizer = fit_vectorizer(out.splits.train.texts());
        return out;
    }();
    return f;
}

TrainResult run(double beta, const RuleSet& rules, std::uint64_t seed = 7) {
    TrainConfig c;
    c.beta = beta;
    c.seed = seed;
    const auto& f = fixture();
    return train(f.splits.train, f.splits.validation, rules, f.vectorizer, c);
}

}  // namespace

TEST_CASE("fixture mines the planted rule") {
    REQUIRE(fixture().rules.find("L0", "L1") != nullptr);
}

TEST_CASE("same seed and config give identical weights") {
    const auto a = run(0.9, fixture().rules);
    const auto b = run(0.9, fixture().rules);
    CHECK(a.model == b.model);
    CHECK(a.log.best_epoch == b.log.best_epoch);
    CHECK_FALSE(run(0.9, fixture().rules, 8).model == a.model);
}

TEST_CASE("beta 0 matches training without rules") {
    const auto with_rules = run(0.0, fixture().rules);
    const auto without = run(0.0, RuleSet());
    CHECK(with_rules.model == without.model);
    for (const auto& e : with_rules.log.epochs) CHECK(e.fuzzy == 0.0);
    CHECK(with_rules.log.warnings.empty());
}

TEST_CASE("beta without rules warns and reduces to the baseline") {
    const auto r = run(0.9, RuleSet());
    REQUIRE(r.log.warnings.size() == 1);
    CHECK(r.model == run(0.0, RuleSet()).model);
}

TEST_CASE("best checkpoint improves on the initial loss") {
    for (double beta : {0.0, 0.5, 0.9}) {
        const auto r = run(beta, fixture().rules);
        CHECK(r.log.best_loss <= r.log.initial_loss);
        CHECK(r.log.best_epoch >= 1);
        CHECK(r.log.best_epoch <= r.log.epochs.size());
    }
}

TEST_CASE("rule term lowers validation violations") {
    const auto base = run(0.0, fixture().rules);
    const auto fuzzy = run(0.9, fixture().rules);
    const auto at_best = [](const TrainResult& r) { return r.log.epochs[r.log.best_epoch - 1].val_violations; };
    CHECK(at_best(fuzzy) < at_best(base));
}

TEST_CASE("early stopping honours patience") {
    TrainConfig c;
    c.early_stop_patience = 1;
    c.seed = 7;
    const auto& f = fixture();
    const auto r = train(f.splits.train, f.splits.validation, RuleSet(), f.vectorizer, c);
    CHECK(r.log.epochs.size() <= r.log.best_epoch + 1);
}

TEST_CASE("config validation") {
    const auto& f = fixture();
    using Tweak = void (*)(TrainConfig&);
    for (Tweak bad : {+[](TrainConfig& c) { c.beta = -0.1; }, +[](TrainConfig& c) { c.learning_rate = 0.0; },
                     +[](TrainConfig& c) { c.batch_size = 0; }, +[](TrainConfig& c) { c.epochs = 0; },
                     +[](TrainConfig& c) { c.class_weights.cap = 1e-4; }}) {
        TrainConfig c;
        bad(c);
        CHECK_THROWS_AS(train(f.splits.train, f.splits.validation, RuleSet(), f.vectorizer, c), ConfigError);
    }
    auto other = f.splits.validation;
    other.vocab = LabelVocab({"L0", "L1", "L2", "L3", "L4"});
    CHECK_THROWS_AS(train(f.splits.train, other, RuleSet(), f.vectorizer, TrainConfig{}), ConfigError);
}

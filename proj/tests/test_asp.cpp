#include <doctest.h>

#include "fixtures.hpp"
#include "nasp/asp.hpp"
#include "nasp/error.hpp"
#include "nasp/random.hpp"

using namespace nasp;

namespace {

PredictionBatch batch_of(const LabelVocab& vocab, const std::vector<std::vector<int>>& rows) {
    PredictionBatch b;
    b.vocab = vocab;
    b.probs = RealMatrix(rows.size(), vocab.size(), 0.0);
    b.decisions = BinaryMatrix(rows.size(), vocab.size(), 0);
    b.thresholds.assign(vocab.size(), 0.5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            b.decisions(i, j) = static_cast<std::uint8_t>(rows[i][j]);
            b.probs(i, j) = rows[i][j] ? 0.9 : 0.1;
        }
        b.doc_ids.push_back("d" + std::to_string(i));
    }
    return b;
}

PredictionBatch random_batch(const LabelVocab& vocab, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<int>> rows(n, std::vector<int>(vocab.size()));
    for (auto& row : rows) {
        for (auto& v : row) v = rng.bernoulli(0.5);
    }
    return batch_of(vocab, rows);
}

RuleSet chain_rules() {
    return RuleSet({Rule{"A", "B", 0.9, std::nullopt, RuleOrigin::expert},
                    Rule{"B", "C", 0.6, std::nullopt, RuleOrigin::expert},
                    Rule{"C", "A", 0.3, std::nullopt, RuleOrigin::expert}});
}

}  // namespace

TEST_SUITE("emission") {
    TEST_CASE("weak constraint line") {
        const auto p = emit_weak_constraints(testing::one_rule("Engine Failure", "Emergency Landing", 0.85));
        const std::string line =
            ":~ holds(\"Engine Failure\"), not holds(\"Emergency Landing\"). "
            "[85@1,\"Engine Failure\",\"Emergency Landing\"]";
        CHECK(p.text.find(line + "\n") != std::string::npos);
        CHECK(p.rule_index.at({"Engine Failure", "Emergency Landing"}) == line);
    }

    TEST_CASE("integer weights") {
        CHECK(asp_weight(0.004) == 1);
        CHECK(asp_weight(0.005) == 1);
        CHECK(asp_weight(0.016) == 2);
        CHECK(asp_weight(1.0) == 100);
    }

    TEST_CASE("empty rule set gives only the header") {
        const auto text = emit_weak_constraints(RuleSet()).text;
        CHECK(text.front() == '%');
        CHECK(text.find('\n') == text.size() - 1);
    }

    TEST_CASE("matches the golden file") {
        const auto rules = load_rules(std::string(NASP_GOLDEN_DIR) + "/three_rules.txt");
        CHECK(emit_weak_constraints(rules).text == testing::slurp(std::string(NASP_GOLDEN_DIR) + "/three_rules.lp"));
    }

    TEST_CASE("labels that cannot be quoted") {
        CHECK_THROWS_AS(emit_weak_constraints(testing::one_rule("say \"hi\"", "B")), EncodingError);
        CHECK_THROWS_AS(emit_weak_constraints(testing::one_rule("A", "back\\slash")), EncodingError);
    }

    TEST_CASE("prediction facts") {
        const LabelVocab vocab({"A", "B", "C"});
        const auto b = batch_of(vocab, {{1, 0, 1}, {0, 0, 0}});
        CHECK(emit_prediction_facts(b, 0) == "holds(\"A\").\nholds(\"C\").\n");
        CHECK(emit_prediction_facts(b, 1).empty());
        CHECK_THROWS_AS(emit_prediction_facts(b, 2), DimensionError);

        const auto spaced = batch_of(LabelVocab({"Bird Strike"}), {{1}});
        CHECK(emit_prediction_facts(spaced, 0) == "holds(\"Bird Strike\").\n");
    }
}

TEST_SUITE("audit") {
    TEST_CASE("two documents, one violation") {
        const auto b = batch_of(LabelVocab({"A", "B"}), {{1, 0}, {1, 1}});
        const auto r = audit_violations(b, testing::one_rule("A", "B"));
        CHECK(r.total == 1);
        CHECK(r.active_premises == 2);
        CHECK(r.rate_percent == 50.0);
        CHECK(r.per_doc == 0.5);
        REQUIRE(r.per_rule.size() == 1);
        CHECK(r.per_rule[0].second.violated == 1);
        CHECK(r.per_rule[0].second.premise_active == 2);
    }

    TEST_CASE("document-normalized figures") {
        const auto r = summarize_violations(323, 1000, 7077);
        CHECK(format_violation_summary(r).rfind("violations=323 viol_per_doc=0.0456 viol_per_1k=45.6", 0) == 0);
        CHECK(r.per_doc == doctest::Approx(323.0 / 7077.0).epsilon(1e-15));
    }

    TEST_CASE("no active premises gives rate 0") {
        const auto b = batch_of(LabelVocab({"A", "B"}), {{0, 1}, {0, 0}});
        const auto r = audit_violations(b, testing::one_rule("A", "B"));
        CHECK(r.total == 0);
        CHECK(r.rate_percent == 0.0);
    }

    TEST_CASE("rules must use batch labels") {
        const auto b = batch_of(LabelVocab({"A", "B"}), {{1, 0}});
        CHECK_THROWS_AS(audit_violations(b, testing::one_rule("A", "Z")), VocabularyError);
    }

    TEST_CASE("document order does not matter and totals add up") {
        const LabelVocab vocab({"A", "B", "C"});
        const auto rules = chain_rules();
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            auto b = random_batch(vocab, 30, seed);
            const auto whole = audit_violations(b, rules);

            std::vector<std::vector<int>> rows(30, std::vector<int>(3));
            for (std::size_t i = 0; i < 30; ++i) {
                for (std::size_t j = 0; j < 3; ++j) rows[i][j] = b.decisions(i, j);
            }
            Rng rng(seed + 100);
            rng.shuffle(rows);
            CHECK(audit_violations(batch_of(vocab, rows), rules).total == whole.total);

            const std::vector<std::vector<int>> head(rows.begin(), rows.begin() + 12);
            const std::vector<std::vector<int>> tail(rows.begin() + 12, rows.end());
            CHECK(audit_violations(batch_of(vocab, head), rules).total +
                      audit_violations(batch_of(vocab, tail), rules).total ==
                  whole.total);
        }
    }

    TEST_CASE("flags agree with the totals") {
        const LabelVocab vocab({"A", "B", "C"});
        const auto b = random_batch(vocab, 40, 3);
        const auto flags = violation_flags(b, chain_rules());
        std::size_t sum = 0;
        for (auto v : flags.data()) sum += v;
        CHECK(sum == audit_violations(b, chain_rules()).total);
    }

    TEST_CASE("json report carries every field") {
        const auto b = batch_of(LabelVocab({"A", "B"}), {{1, 0}, {1, 1}});
        const auto text = violation_report_json(audit_violations(b, testing::one_rule("A", "B")));
        for (const char* key : {"total", "active_premises", "num_docs", "rate_percent", "per_doc", "per_1k",
                                "per_rule", "premise_active", "violated"}) {
            CHECK(text.find(std::string("\"") + key + "\"") != std::string::npos);
        }
    }
}

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nasp/error.hpp"
#include "nasp/random.hpp"
#include "nasp/synthetic.hpp"

using namespace nasp;
using nasp::testing::rec;

namespace {

Dataset ef_el_fixture() {
    std::vector<Record> records;
    for (int i = 1; i <= 10; ++i) {
        std::vector<std::string> labels;
        if (i <= 4) labels = {"EF", "EL"};
        if (i == 7) labels = {"EL"};
        records.push_back(rec("r" + std::to_string(i), labels));
    }
    return make_dataset(std::move(records));
}

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t m) {
    Rng rng(seed);
    std::vector<Record> records;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) names.push_back("c" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> labels;
        for (const auto& name : names) {
            if (rng.bernoulli(0.35)) labels.push_back(name);
        }
        records.push_back(rec("d" + std::to_string(i), labels));
    }
    return make_dataset(std::move(records), LabelVocab(names));
}

}  // namespace

TEST_SUITE("mining") {
    TEST_CASE("worked co-occurrence example") {
        const auto rules = mine_rules(ef_el_fixture(), 0.2, 0.8);
        REQUIRE(rules.size() == 2);
        CHECK(rules[0].premise == "EF");
        CHECK(rules[0].conclusion == "EL");
        CHECK(rules[0].weight == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rules[1].premise == "EL");
        CHECK(rules[1].conclusion == "EF");
        CHECK(rules[1].weight == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(rules[0].origin == RuleOrigin::mined);
    }

    TEST_CASE("confidence 1.0 with no perfect pair gives nothing") {
        CHECK_THROWS(mine_rules(ef_el_fixture(), 0.0, 1.5));
        const auto ds = make_dataset({rec("1", {"A"}), rec("2", {"B"}), rec("3", {"A", "B"}), rec("4", {"B"})});
        CHECK(mine_rules(ds, 0.0, 1.0).empty());
    }

    TEST_CASE("planted noise-free rule is mined with weight 1") {
        const auto ds = generate_synthetic(300, 4, testing::one_rule("L0", "L1"), 0.0, 5);
        const auto rules = mine_rules(ds, 0.0, 0.7);
        const auto* r = rules.find("L0", "L1");
        REQUIRE(r != nullptr);
        CHECK(r->weight == 1.0);
    }

    TEST_CASE("needs two labels and the train split") {
        CHECK_THROWS(mine_rules(make_dataset({rec("1", {"A"})}), 0.0, 0.5));
        auto ds = ef_el_fixture();
        ds.split = Split::test;
        CHECK_THROWS(mine_rules(ds, 0.0, 0.5));
    }

    TEST_CASE("weights match an independent recount") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto ds = random_dataset(seed, 60, 5);
            const auto y = ds.targets();
            const auto rules = mine_rules(ds, 0.04, 0.31);
            std::size_t expected = 0;
            for (std::size_t a = 0; a < 5; ++a) {
                for (std::size_t b = 0; b < 5; ++b) {
                    if (a == b) continue;
                    std::size_t na = 0, nab = 0;
                    for (std::size_t i = 0; i < y.rows(); ++i) {
                        na += y(i, a);
                        nab += y(i, a) && y(i, b);
                    }
                    const double support = static_cast<double>(na) / static_cast<double>(y.rows());
                    if (na == 0 || support < 0.04) continue;
                    const double conf = static_cast<double>(nab) / static_cast<double>(na);
                    const auto* r = rules.find(ds.vocab.name(a), ds.vocab.name(b));
                    if (conf >= 0.31) {
                        ++expected;
                        REQUIRE(r != nullptr);
                        CHECK(r->weight == conf);
                    } else {
                        CHECK(r == nullptr);
                    }
                }
            }
            CHECK(rules.size() == expected);
            for (std::size_t k = 1; k < rules.size(); ++k) CHECK(rules[k - 1].weight >= rules[k].weight);
        }
    }

    TEST_CASE("record order does not matter") {
        auto ds = random_dataset(42, 80, 4);
        const auto before = mine_rules(ds, 0.01, 0.2);
        Rng rng(9);
        rng.shuffle(ds.records);
        CHECK(mine_rules(ds, 0.01, 0.2) == before);
    }
}

TEST_SUITE("rule files") {
    TEST_CASE("parse one rule with spaces in labels") {
        const auto rules = parse_rules(R"(soft_rule("Engine Failure","Emergency Landing",0.85).)");
        REQUIRE(rules.size() == 1);
        CHECK(rules[0].premise == "Engine Failure");
        CHECK(rules[0].conclusion == "Emergency Landing");
        CHECK(rules[0].weight == 0.85);
        CHECK(rules[0].origin == RuleOrigin::expert);
    }

    TEST_CASE("empty text and comments") {
        CHECK(parse_rules("").empty());
        const auto rules = parse_rules("% header\n\n  soft_rule(a, b, 0.5).  % trailing\n");
        REQUIRE(rules.size() == 1);
        CHECK(rules[0].premise == "a");
    }

    TEST_CASE("invalid rules") {
        CHECK_THROWS_AS(parse_rules(R"(soft_rule("A","A",0.5).)"), SelfImplicationError);
        CHECK_THROWS_AS(parse_rules("soft_rule(\"A\",\"B\",0.5).\nsoft_rule(\"A\",\"B\",0.6).\n"),
                        DuplicateRuleError);
        try {
            parse_rules("\nsoft_rule(\"A\",\"B\",1.5).\n");
            FAIL("expected a range error");
        } catch (const RangeError& e) {
            CHECK(e.line() == 2);
        }
        CHECK_THROWS_AS(parse_rules(R"(soft_rule("A","B",0).)"), RangeError);
        CHECK_THROWS_AS(parse_rules(R"(soft_rule("A","B",0.5))"), ParseError);
        CHECK_THROWS_AS(parse_rules(R"(rule("A","B",0.5).)"), ParseError);
        CHECK_THROWS_AS(parse_rules(R"(soft_rule("A","B",x).)"), ParseError);
    }

    TEST_CASE("serialize") {
        CHECK(serialize_rules(testing::one_rule("EF", "EL", 0.85)) == "soft_rule(\"EF\",\"EL\",0.8500).\n");
        CHECK(serialize_rules(RuleSet()).empty());
        CHECK_THROWS_AS(serialize_rules(testing::one_rule("a\"b", "c")), EncodingError);
    }

    TEST_CASE("round trip keeps four decimals") {
        Rng rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Rule> v;
            for (int k = 0; k < 3; ++k) {
                Rule r;
                r.premise = "p" + std::to_string(k);
                r.conclusion = "c " + std::to_string(k);
                r.weight = 1e-4 + (1.0 - 1e-4) * rng.uniform();
                v.push_back(r);
            }
            const RuleSet rules(v);
            const auto back = parse_rules(serialize_rules(rules));
            REQUIRE(back.size() == 3);
            for (std::size_t k = 0; k < 3; ++k) {
                CHECK(back[k].premise == rules[k].premise);
                CHECK(back[k].conclusion == rules[k].conclusion);
                CHECK(std::abs(back[k].weight - rules[k].weight) <= 5e-5 + 1e-12);
            }
            CHECK(serialize_rules(back) == serialize_rules(rules));
        }
    }

    TEST_CASE("expert rules override mined weights") {
        Rule mined{"A", "B", 0.7, 0.2, RuleOrigin::mined};
        Rule other{"B", "C", 0.9, 0.1, RuleOrigin::mined};
        Rule expert{"A", "B", 0.95, std::nullopt, RuleOrigin::expert};
        Rule extra{"C", "D", 0.5, std::nullopt, RuleOrigin::expert};
        const auto merged = merge_rules(RuleSet({mined, other}), RuleSet({expert, extra}));
        REQUIRE(merged.size() == 3);
        CHECK(merged[0] == expert);
        CHECK(merged[1] == other);
        CHECK(merged[2] == extra);
    }
}

TEST_SUITE("validation") {
    TEST_CASE("two-cycle") {
        Rule ab{"A", "B", 0.5, std::nullopt, RuleOrigin::expert};
        Rule ba{"B", "A", 0.5, std::nullopt, RuleOrigin::expert};
        const auto report = validate_ruleset(RuleSet({ab, ba}), LabelVocab({"A", "B"}));
        REQUIRE(report.cycles.size() == 1);
        CHECK(report.cycles[0] == std::vector<std::string>{"A", "B"});
        CHECK(report.unknown_labels.empty());
    }

    TEST_CASE("unknown label") {
        const auto report = validate_ruleset(testing::one_rule("A", "Z"), LabelVocab({"A", "B"}));
        REQUIRE(report.unknown_labels.size() == 1);
        CHECK(report.unknown_labels[0].label == "Z");
        CHECK(report.unknown_labels[0].rule_index == 0);
    }

    TEST_CASE("empty rule set is clean") {
        CHECK(validate_ruleset(RuleSet(), LabelVocab({"A"})).clean());
    }

    TEST_CASE("three-cycle and chain") {
        std::vector<Rule> v;
        for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{{"C", "A"}, {"A", "B"}, {"B", "C"}, {"C", "D"}}) {
            v.push_back(Rule{a, b, 0.5, std::nullopt, RuleOrigin::expert});
        }
        const auto report = validate_ruleset(RuleSet(v), LabelVocab({"A", "B", "C", "D"}));
        REQUIRE(report.cycles.size() == 1);
        CHECK(report.cycles[0] == std::vector<std::string>{"A", "B", "C"});
    }

    TEST_CASE("cycle enumeration is capped") {
        // Complete digraph on 6 nodes has far more than 10 elementary cycles.
        std::vector<Rule> v;
        std::vector<std::string> names;
        for (int i = 0; i < 6; ++i) names.push_back("n" + std::to_string(i));
        for (const auto& a : names) {
            for (const auto& b : names) {
                if (a != b) v.push_back(Rule{a, b, 0.5, std::nullopt, RuleOrigin::expert});
            }
        }
        const auto report = validate_ruleset(RuleSet(v), LabelVocab(names), 10);
        CHECK(report.cycles.size() == 10);
        CHECK(report.cycles_truncated);
    }
}

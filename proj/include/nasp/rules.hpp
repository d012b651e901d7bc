#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nasp/corpus.hpp"

namespace nasp {

enum class RuleOrigin { mined, expert };

/// Weighted soft implication `premise => conclusion`.
struct Rule {
    std::string premise;
    std::string conclusion;
    double weight = 1.0;  ///< in (0, 1]
    std::optional<double> support;  ///< joint frequency P(premise and conclusion), when mined
    RuleOrigin origin = RuleOrigin::expert;

    bool operator==(const Rule&) const = default;
};

/// Ordered rules with unique (premise, conclusion) keys.
class RuleSet {
public:
    RuleSet() = default;
    /// Validates every rule; throws on duplicates, self-implications or bad weights.
    explicit RuleSet(std::vector<Rule> rules);

    const std::vector<Rule>& rules() const noexcept { return rules_; }
    std::size_t size() const noexcept { return rules_.size(); }
    bool empty() const noexcept { return rules_.empty(); }
    auto begin() const { return rules_.begin(); }
    auto end() const { return rules_.end(); }
    const Rule& operator[](std::size_t i) const { return rules_[i]; }

    const Rule* find(std::string_view premise, std::string_view conclusion) const;

    bool operator==(const RuleSet&) const = default;

private:
    std::vector<Rule> rules_;
};

/// Rule resolved to label positions of a particular vocabulary.
struct IndexedRule {
    std::size_t premise;
    std::size_t conclusion;
    double weight;
};

/// Throws VocabularyError for the first label missing from `vocab`.
std::vector<IndexedRule> index_rules(const RuleSet& rules, const LabelVocab& vocab);

/// Mines every ordered pair (a, b), a != b, with P(a) >= min_support and
/// P(b | a) >= min_confidence. Weight is the empirical confidence; output is
/// sorted by descending weight, then by (premise, conclusion).
RuleSet mine_rules(const Dataset& dataset, double min_support, double min_confidence);

/// Parses `soft_rule("a","b",w).` lines. `%` comments and blank lines are skipped.
RuleSet parse_rules(std::string_view text, RuleOrigin origin = RuleOrigin::expert);
RuleSet load_rules(const std::filesystem::path& path, RuleOrigin origin = RuleOrigin::expert);

/// One `soft_rule("a","b",w).` line per rule, weight with four decimals.
std::string serialize_rules(const RuleSet& rules);
void save_rules(const std::filesystem::path& path, const RuleSet& rules);

/// Mined rules with expert rules layered on top: an expert rule replaces the
/// mined rule with the same key in place; new expert rules are appended.
RuleSet merge_rules(const RuleSet& mined, const RuleSet& expert);

struct UnknownLabel {
    std::size_t rule_index;
    std::string label;
};

struct ValidationReport {
    std::vector<UnknownLabel> unknown_labels;
    /// Elementary directed cycles, each rotated to start at its smallest label.
    std::vector<std::vector<std::string>> cycles;
    bool cycles_truncated = false;

    bool clean() const { return unknown_labels.empty() && cycles.empty(); }
};

ValidationReport validate_ruleset(const RuleSet& rules, const LabelVocab& vocab,
                                  std::size_t max_cycles = 1000);

}  // namespace nasp

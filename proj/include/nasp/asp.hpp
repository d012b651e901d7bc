#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nasp/prediction.hpp"
#include "nasp/rules.hpp"

namespace nasp {

using RuleKey = std::pair<std::string, std::string>;

/// Clingo source for a rule set.
struct AspProgram {
    std::string text;
    /// (premise, conclusion) -> emitted weak-constraint line.
    std::map<RuleKey, std::string> rule_index;
};

/// Integer solver weight for a rule weight in (0, 1]: max(1, round(100 * w)).
int asp_weight(double weight);

/// One weak constraint and one `violation/2` rule per rule, in rule order,
/// after a header comment.
AspProgram emit_weak_constraints(const RuleSet& rules);

/// `holds("label").` for each predicted-active label of one document, sorted
/// by label name, newline-terminated.
std::string emit_prediction_facts(const PredictionBatch& batch, std::size_t doc_index);

struct RuleViolations {
    std::size_t premise_active = 0;
    std::size_t violated = 0;
};

struct ViolationReport {
    std::size_t total = 0;
    std::size_t active_premises = 0;
    std::size_t num_docs = 0;
    double rate_percent = 0.0;
    double per_doc = 0.0;
    double per_1k = 0.0;
    /// In rule order.
    std::vector<std::pair<RuleKey, RuleViolations>> per_rule;
};

/// Builds the document-normalized figures from raw counts. A zero
/// `active_premises` gives a rate of 0.
ViolationReport summarize_violations(std::size_t total, std::size_t active_premises, std::size_t num_docs);

/// Counts (document, rule) pairs with the premise predicted and the
/// conclusion not predicted.
ViolationReport audit_violations(const PredictionBatch& batch, const RuleSet& rules);

/// Per-document violated flags, docs x rules.
BinaryMatrix violation_flags(const PredictionBatch& batch, const RuleSet& rules);

/// `per_doc` to 4 decimals and `per_1k` to 1 decimal, e.g.
/// "violations=323 viol_per_doc=0.0456 viol_per_1k=45.6".
std::string format_violation_summary(const ViolationReport& report);

std::string violation_report_json(const ViolationReport& report);

void save_program(const std::filesystem::path& path, const AspProgram& program);

/// Runs an external clingo binary on the program grounded with each
/// document's facts and reads the `violation/2` atoms of the answer set.
struct SolverCheck {
    std::size_t documents = 0;
    std::size_t mismatches = 0;
    BinaryMatrix solver_flags;  ///< docs x rules
    std::vector<std::string> diagnostics;

    bool agrees() const { return mismatches == 0; }
};

SolverCheck cross_check_with_clingo(const std::filesystem::path& clingo, const PredictionBatch& batch,
                                    const RuleSet& rules, const std::filesystem::path& work_dir);

}  // namespace nasp

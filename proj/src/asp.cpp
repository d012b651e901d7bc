#include "nasp/asp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nasp/error.hpp"

namespace nasp {

using json = nlohmann::json;

namespace {

const std::string& quotable(const std::string& label) {
    if (label.find_first_of("\"\\\n") != std::string::npos) {
        throw EncodingError("label \"" + label + "\" cannot be written as a quoted ASP constant");
    }
    return label;
}

std::string quoted(const std::string& label) { return "\"" + quotable(label) + "\""; }

}  // namespace

int asp_weight(double weight) {
    return std::max(1, static_cast<int>(std::lround(100.0 * weight)));
}

AspProgram emit_weak_constraints(const RuleSet& rules) {
    AspProgram program;
    program.text = "% soft implication rules: weak constraints (weight = round(100 * w), priority 1)\n";
    for (const auto& r : rules) {
        if (!(r.weight > 0.0 && r.weight <= 1.0)) throw RangeError("rule weight outside (0, 1]");
        const auto a = quoted(r.premise);
        const auto b = quoted(r.conclusion);
        const auto body = "holds(" + a + "), not holds(" + b + ").";
        auto constraint = ":~ " + body + " [" + std::to_string(asp_weight(r.weight)) + "@1," + a + "," + b + "]";
        program.text += constraint + "\n";
        program.text += "violation(" + a + "," + b + ") :- " + body + "\n";
        program.rule_index.emplace(RuleKey{r.premise, r.conclusion}, std::move(constraint));
    }
    return program;
}

std::string emit_prediction_facts(const PredictionBatch& batch, std::size_t doc_index) {
    if (doc_index >= batch.num_docs()) {
        throw DimensionError("document index " + std::to_string(doc_index) + " out of range for " +
                             std::to_string(batch.num_docs()) + " documents");
    }
    std::vector<std::string> active;
    for (std::size_t j = 0; j < batch.vocab.size(); ++j) {
        if (batch.decisions(doc_index, j)) active.push_back(batch.vocab.name(j));
    }
    std::sort(active.begin(), active.end());
    std::string out;
    for (const auto& label : active) out += "holds(" + quoted(label) + ").\n";
    return out;
}

ViolationReport summarize_violations(std::size_t total, std::size_t active_premises, std::size_t num_docs) {
    ViolationReport report;
    report.total = total;
    report.active_premises = active_premises;
    report.num_docs = num_docs;
    report.rate_percent = active_premises == 0
                              ? 0.0
                              : 100.0 * static_cast<double>(total) / static_cast<double>(active_premises);
    report.per_doc = num_docs == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(num_docs);
    report.per_1k = 1000.0 * report.per_doc;
    return report;
}

BinaryMatrix violation_flags(const PredictionBatch& batch, const RuleSet& rules) {
    const auto indexed = index_rules(rules, batch.vocab);
    BinaryMatrix flags(batch.num_docs(), indexed.size(), 0);
    for (std::size_t i = 0; i < batch.num_docs(); ++i) {
        for (std::size_t k = 0; k < indexed.size(); ++k) {
            flags(i, k) = batch.decisions(i, indexed[k].premise) && !batch.decisions(i, indexed[k].conclusion);
        }
    }
    return flags;
}

ViolationReport audit_violations(const PredictionBatch& batch, const RuleSet& rules) {
    const auto indexed = index_rules(rules, batch.vocab);
    std::vector<RuleViolations> counts(indexed.size());
    std::size_t total = 0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < batch.num_docs(); ++i) {
        for (std::size_t k = 0; k < indexed.size(); ++k) {
            if (!batch.decisions(i, indexed[k].premise)) continue;
            ++counts[k].premise_active;
            ++active;
            if (!batch.decisions(i, indexed[k].conclusion)) {
                ++counts[k].violated;
                ++total;
            }
        }
    }
    auto report = summarize_violations(total, active, batch.num_docs());
    for (std::size_t k = 0; k < indexed.size(); ++k) {
        report.per_rule.emplace_back(RuleKey{rules[k].premise, rules[k].conclusion}, counts[k]);
    }
    return report;
}

std::string format_violation_summary(const ViolationReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "violations=%zu viol_per_doc=%.4f viol_per_1k=%.1f rate_percent=%.2f",
                  report.total, report.per_doc, report.per_1k, report.rate_percent);
    return buf;
}

std::string violation_report_json(const ViolationReport& report) {
    json j;
    j["total"] = report.total;
    j["active_premises"] = report.active_premises;
    j["num_docs"] = report.num_docs;
    j["rate_percent"] = report.rate_percent;
    j["per_doc"] = report.per_doc;
    j["per_1k"] = report.per_1k;
    j["per_rule"] = json::array();
    for (const auto& [key, c] : report.per_rule) {
        j["per_rule"].push_back({{"premise", key.first},
                                 {"conclusion", key.second},
                                 {"premise_active", c.premise_active},
                                 {"violated", c.violated}});
    }
    return j.dump(2) + "\n";
}

void save_program(const std::filesystem::path& path, const AspProgram& program) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write ASP program " + path.string());
    out << program.text;
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

std::string run_command(const std::string& command) {
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) throw Error("cannot run: " + command);
    std::string output;
    char buf[4096];
    while (auto n = std::fread(buf, 1, sizeof buf, pipe.get())) output.append(buf, n);
    return output;
}

// Splits `violation("a","b")` into its two string arguments.
bool parse_violation_atom(const std::string& atom, RuleKey& key) {
    static const std::string prefix = "violation(";
    if (atom.rfind(prefix, 0) != 0) return false;
    std::vector<std::string> args;
    for (std::size_t pos = prefix.size(); pos < atom.size();) {
        if (atom[pos] != '"') {
            ++pos;
            continue;
        }
        const auto close = atom.find('"', pos + 1);
        if (close == std::string::npos) return false;
        args.push_back(atom.substr(pos + 1, close - pos - 1));
        pos = close + 1;
    }
    if (args.size() != 2) return false;
    key = {args[0], args[1]};
    return true;
}

}  // namespace

SolverCheck cross_check_with_clingo(const std::filesystem::path& clingo, const PredictionBatch& batch,
                                    const RuleSet& rules, const std::filesystem::path& work_dir) {
    const auto program = emit_weak_constraints(rules);
    const auto expected = violation_flags(batch, rules);
    std::map<RuleKey, std::size_t> position;
    for (std::size_t k = 0; k < rules.size(); ++k) position[{rules[k].premise, rules[k].conclusion}] = k;

    std::filesystem::create_directories(work_dir);
    SolverCheck check;
    check.documents = batch.num_docs();
    check.solver_flags = BinaryMatrix(batch.num_docs(), rules.size(), 0);

    for (std::size_t i = 0; i < batch.num_docs(); ++i) {
        const auto file = work_dir / ("doc_" + std::to_string(i) + ".lp");
        {
            std::ofstream out(file, std::ios::binary);
            out << program.text << emit_prediction_facts(batch, i);
        }
        const auto output = run_command(shell_quote(clingo.string()) + " --outf=2 " + shell_quote(file.string()) +
                                        " 2>/dev/null");
        json result;
        try {
            result = json::parse(output);
        } catch (const json::parse_error&) {
            throw Error("clingo produced unreadable output for document " + std::to_string(i));
        }
        const auto& witnesses = result.at("Call").at(0).at("Witnesses");
        if (witnesses.empty()) throw Error("clingo found no answer set for document " + std::to_string(i));
        for (const auto& atom : witnesses.back().at("Value")) {
            RuleKey key;
            if (!parse_violation_atom(atom.get<std::string>(), key)) continue;
            auto it = position.find(key);
            if (it == position.end()) continue;
            check.solver_flags(i, it->second) = 1;
        }
        for (std::size_t k = 0; k < rules.size(); ++k) {
            if (check.solver_flags(i, k) != expected(i, k)) {
                ++check.mismatches;
                check.diagnostics.push_back("document " + batch.doc_ids.at(i) + ", rule \"" + rules[k].premise +
                                            "\" => \"" + rules[k].conclusion + "\": auditor " +
                                            std::to_string(expected(i, k)) + ", solver " +
                                            std::to_string(check.solver_flags(i, k)));
            }
        }
    }
    return check;
}

}  // namespace nasp

#include "nasp/rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nasp/error.hpp"

namespace nasp {

namespace {

void check_rule(const Rule& r, std::size_t line) {
    if (!(r.weight > 0.0 && r.weight <= 1.0)) {
        std::ostringstream msg;
        msg << "weight " << r.weight << " of rule \"" << r.premise << "\" => \"" << r.conclusion
            << "\" is outside (0, 1]";
        throw RangeError(msg.str(), line);
    }
    if (r.premise == r.conclusion) {
        throw SelfImplicationError("self-implication \"" + r.premise + "\" => \"" + r.conclusion + "\"", line);
    }
}

std::string duplicate_message(const Rule& r) {
    return "duplicate rule \"" + r.premise + "\" => \"" + r.conclusion + "\"";
}

}  // namespace

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : rules_) {
        check_rule(r, 0);
        if (!seen.emplace(r.premise, r.conclusion).second) throw DuplicateRuleError(duplicate_message(r));
    }
}

const Rule* RuleSet::find(std::string_view premise, std::string_view conclusion) const {
    for (const auto& r : rules_) {
        if (r.premise == premise && r.conclusion == conclusion) return &r;
    }
    return nullptr;
}

std::vector<IndexedRule> index_rules(const RuleSet& rules, const LabelVocab& vocab) {
    std::vector<IndexedRule> out;
    out.reserve(rules.size());
    for (const auto& r : rules) {
        out.push_back({vocab.index(r.premise), vocab.index(r.conclusion), r.weight});
    }
    return out;
}

RuleSet mine_rules(const Dataset& dataset, double min_support, double min_confidence) {
    if (dataset.split != Split::train) throw ConfigError("rules must be mined from the training split");
    if (!(min_support >= 0.0 && min_support <= 1.0)) throw ConfigError("min_support must be in [0, 1]");
    if (!(min_confidence > 0.0 && min_confidence <= 1.0)) throw ConfigError("min_confidence must be in (0, 1]");
    const std::size_t m = dataset.vocab.size();
    if (m < 2) throw ConfigError("rule mining needs at least two labels");
    const std::size_t n = dataset.size();
    if (n == 0) throw Error("empty dataset");

    std::vector<std::size_t> single(m, 0);
    std::vector<std::size_t> joint(m * m, 0);
    std::vector<std::size_t> active;
    for (const auto& rec : dataset.records) {
        active.clear();
        for (const auto& label : rec.labels) active.push_back(dataset.vocab.index(label));
        for (auto a : active) {
            ++single[a];
            for (auto b : active) ++joint[a * m + b];
        }
    }

    // Small slack so that e.g. 4/5 passes a 0.8 threshold regardless of rounding.
    constexpr double slack = 1e-12;
    const auto total = static_cast<double>(n);
    std::vector<Rule> rules;
    for (std::size_t a = 0; a < m; ++a) {
        if (single[a] == 0) continue;
        const double p_premise = static_cast<double>(single[a]) / total;
        if (p_premise + slack < min_support) continue;
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b || joint[a * m + b] == 0) continue;
            const double confidence = static_cast<double>(joint[a * m + b]) / static_cast<double>(single[a]);
            if (confidence + slack < min_confidence) continue;
            rules.push_back(Rule{dataset.vocab.name(a), dataset.vocab.name(b), confidence,
                                 static_cast<double>(joint[a * m + b]) / total, RuleOrigin::mined});
        }
    }
    std::stable_sort(rules.begin(), rules.end(), [](const Rule& x, const Rule& y) {
        if (x.weight != y.weight) return x.weight > y.weight;
        if (x.premise != y.premise) return x.premise < y.premise;
        return x.conclusion < y.conclusion;
    });
    return RuleSet(std::move(rules));
}

namespace {

class LineScanner {
public:
    LineScanner(std::string_view text, std::size_t line) : s_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }

    void expect(std::string_view token) {
        skip_ws();
        if (s_.substr(pos_, token.size()) != token) {
            throw ParseError("expected '" + std::string(token) + "' at column " + std::to_string(pos_ + 1), line_);
        }
        pos_ += token.size();
    }

    std::string term() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '"') {
            const auto close = s_.find('"', pos_ + 1);
            if (close == std::string_view::npos) throw ParseError("unterminated string", line_);
            std::string out(s_.substr(pos_ + 1, close - pos_ - 1));
            pos_ = close + 1;
            return out;
        }
        const auto start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (start == pos_) throw ParseError("expected a label at column " + std::to_string(pos_ + 1), line_);
        return std::string(s_.substr(start, pos_ - start));
    }

    double number() {
        skip_ws();
        double value = 0.0;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{}) throw ParseError("expected a numeric weight at column " + std::to_string(pos_ + 1), line_);
        pos_ += static_cast<std::size_t>(ptr - first);
        return value;
    }

    void expect_end() {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] != '%') {
            throw ParseError("unexpected trailing text at column " + std::to_string(pos_ + 1), line_);
        }
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

}  // namespace

RuleSet parse_rules(std::string_view text, RuleOrigin origin) {
    std::vector<Rule> rules;
    std::set<std::pair<std::string, std::string>> seen;
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        auto end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(begin, end - begin);
        begin = end + 1;
        ++line_no;

        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '%') continue;

        LineScanner scan(line, line_no);
        scan.expect("soft_rule");
        scan.expect("(");
        Rule r;
        r.premise = scan.term();
        scan.expect(",");
        r.conclusion = scan.term();
        scan.expect(",");
        r.weight = scan.number();
        scan.expect(")");
        scan.expect(".");
        scan.expect_end();
        r.origin = origin;

        check_rule(r, line_no);
        if (!seen.emplace(r.premise, r.conclusion).second) throw DuplicateRuleError(duplicate_message(r), line_no);
        rules.push_back(std::move(r));
    }
    return RuleSet(std::move(rules));
}

RuleSet load_rules(const std::filesystem::path& path, RuleOrigin origin) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open rule file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_rules(buf.str(), origin);
}

std::string serialize_rules(const RuleSet& rules) {
    std::string out;
    char weight[32];
    for (const auto& r : rules) {
        for (const auto* label : {&r.premise, &r.conclusion}) {
            if (label->find_first_of("\"\n") != std::string::npos) {
                throw EncodingError("label \"" + *label + "\" cannot be written as a quoted rule term");
            }
        }
        // Never print 0.0000: it would not parse back as a valid weight.
        std::snprintf(weight, sizeof weight, "%.4f", std::max(r.weight, 1e-4));
        out += "soft_rule(\"" + r.premise + "\",\"" + r.conclusion + "\"," + weight + ").\n";
    }
    return out;
}

void save_rules(const std::filesystem::path& path, const RuleSet& rules) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write rule file " + path.string());
    out << serialize_rules(rules);
}

RuleSet merge_rules(const RuleSet& mined, const RuleSet& expert) {
    std::vector<Rule> out = mined.rules();
    for (const auto& e : expert) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Rule& r) {
            return r.premise == e.premise && r.conclusion == e.conclusion;
        });
        if (it != out.end()) {
            *it = e;
        } else {
            out.push_back(e);
        }
    }
    return RuleSet(std::move(out));
}

namespace {

struct CycleFinder {
    const std::vector<std::vector<std::size_t>>& adj;
    std::size_t max_cycles;
    std::vector<std::vector<std::size_t>> cycles;
    bool truncated = false;
    std::vector<std::size_t> path;
    std::vector<bool> on_path;

    // Cycles are reported once, from their smallest node; only nodes larger
    // than the start are explored.
    void search(std::size_t start, std::size_t node) {
        for (auto next : adj[node]) {
            if (truncated) return;
            if (next == start) {
                if (cycles.size() == max_cycles) {
                    truncated = true;
                    return;
                }
                cycles.push_back(path);
            } else if (next > start && !on_path[next]) {
                on_path[next] = true;
                path.push_back(next);
                search(start, next);
                path.pop_back();
                on_path[next] = false;
            }
        }
    }
};

}  // namespace

ValidationReport validate_ruleset(const RuleSet& rules, const LabelVocab& vocab, std::size_t max_cycles) {
    ValidationReport report;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        for (const auto* label : {&rules[i].premise, &rules[i].conclusion}) {
            if (!vocab.contains(*label)) report.unknown_labels.push_back({i, *label});
        }
    }

    std::vector<std::string> names;
    for (const auto& r : rules) {
        names.push_back(r.premise);
        names.push_back(r.conclusion);
    }
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    auto node = [&](const std::string& name) {
        return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), name) - names.begin());
    };
    std::vector<std::vector<std::size_t>> adj(names.size());
    for (const auto& r : rules) adj[node(r.premise)].push_back(node(r.conclusion));
    for (auto& out : adj) std::sort(out.begin(), out.end());

    CycleFinder finder{adj, max_cycles, {}, false, {}, std::vector<bool>(names.size(), false)};
    for (std::size_t s = 0; s < names.size() && !finder.truncated; ++s) {
        finder.path = {s};
        finder.on_path[s] = true;
        finder.search(s, s);
        finder.on_path[s] = false;
    }
    for (const auto& c : finder.cycles) {
        std::vector<std::string> labels;
        for (auto v : c) labels.push_back(names[v]);
        report.cycles.push_back(std::move(labels));
    }
    report.cycles_truncated = finder.truncated;
    return report;
}

}  // namespace nasp

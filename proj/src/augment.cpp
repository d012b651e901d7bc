#include "nasp/augment.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "nasp/error.hpp"

namespace nasp {

namespace {

struct Candidate {
    std::size_t record;
    double max_weight;
    std::vector<std::uint8_t> labels;
    std::vector<std::size_t> fired;  // rule positions that switched a conclusion on
};

}  // namespace

AugmentedDataset augment_dataset(const Dataset& dataset, const RuleSet& rules, const AugmentOptions& options) {
    if (dataset.split != Split::train) throw ConfigError("only the training split can be augmented");
    if (options.max_growth && !(*options.max_growth >= 0.0)) throw ConfigError("max_growth must be >= 0");
    const auto indexed = index_rules(rules, dataset.vocab);

    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto original = encode_labels(dataset.records[i], dataset.vocab);
        auto labels = original;
        Candidate c{i, 0.0, {}, {}};
        // Single step reads premises from the original labels only; closure
        // keeps firing on derived premises until nothing changes.
        for (bool changed = true; changed;) {
            changed = false;
            const auto& premises = options.closure ? labels : original;
            for (std::size_t k = 0; k < indexed.size(); ++k) {
                const auto& r = indexed[k];
                if (premises[r.premise] && !labels[r.conclusion]) {
                    labels[r.conclusion] = 1;
                    c.fired.push_back(k);
                    c.max_weight = std::max(c.max_weight, r.weight);
                    changed = options.closure;
                }
            }
        }
        if (!c.fired.empty()) {
            c.labels = std::move(labels);
            candidates.push_back(std::move(c));
        }
    }

    if (options.max_growth) {
        const auto cap = static_cast<std::size_t>(
            std::floor(*options.max_growth * static_cast<double>(dataset.size()) + 1e-9));
        if (candidates.size() > cap) {
            std::stable_sort(candidates.begin(), candidates.end(),
                             [](const Candidate& a, const Candidate& b) { return a.max_weight > b.max_weight; });
            candidates.resize(cap);
            std::sort(candidates.begin(), candidates.end(),
                      [](const Candidate& a, const Candidate& b) { return a.record < b.record; });
        }
    }

    AugmentedDataset out;
    out.dataset.vocab = dataset.vocab;
    out.dataset.split = dataset.split;
    out.dataset.duplicate_label_warnings = dataset.duplicate_label_warnings;
    out.dataset.records = dataset.records;
    std::vector<std::size_t> per_rule(indexed.size(), 0);
    std::size_t k = 0;
    for (const auto& c : candidates) {
        Record copy;
        copy.id = dataset.records[c.record].id + "#aug" + std::to_string(++k);
        copy.text = dataset.records[c.record].text;
        copy.labels = decode_labels(c.labels, dataset.vocab);
        out.dataset.records.push_back(std::move(copy));
        for (auto r : c.fired) ++per_rule[r];
    }

    auto& s = out.summary;
    s.original_size = dataset.size();
    s.added = candidates.size();
    s.growth_percent = dataset.size() == 0 ? 0.0
                                           : 100.0 * static_cast<double>(s.added) / static_cast<double>(dataset.size());
    for (std::size_t r = 0; r < indexed.size(); ++r) {
        s.per_rule_added.push_back({{rules[r].premise, rules[r].conclusion}, per_rule[r]});
    }
    return out;
}

std::string augmentation_summary_json(const AugmentationSummary& summary) {
    nlohmann::json j;
    j["original_size"] = summary.original_size;
    j["added"] = summary.added;
    j["growth_percent"] = summary.growth_percent;
    j["per_rule_added"] = nlohmann::json::array();
    for (const auto& [key, count] : summary.per_rule_added) {
        j["per_rule_added"].push_back({{"premise", key.first}, {"conclusion", key.second}, {"added", count}});
    }
    return j.dump(2) + "\n";
}

}  // namespace nasp

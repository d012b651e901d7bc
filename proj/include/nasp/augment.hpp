#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nasp/corpus.hpp"
#include "nasp/rules.hpp"

namespace nasp {

struct AugmentOptions {
    /// Cap on added records as a fraction of the original size (0.15 = 15%).
    std::optional<double> max_growth;
    /// Apply rules to fixpoint inside each copy instead of a single step.
    bool closure = false;
};

struct AugmentationSummary {
    std::size_t original_size = 0;
    std::size_t added = 0;
    /// Rule order; counts added copies in which the rule set its conclusion.
    std::vector<std::pair<std::pair<std::string, std::string>, std::size_t>> per_rule_added;
    double growth_percent = 0.0;
};

struct AugmentedDataset {
    Dataset dataset;
    AugmentationSummary summary;
};

/// Returns the originals followed by one label-completed copy for every
/// record that has some rule premise without its conclusion. The copy keeps
/// the text, gets id `<id>#aug<k>` (k counts additions from 1) and has every
/// triggered conclusion switched on.
AugmentedDataset augment_dataset(const Dataset& dataset, const RuleSet& rules, const AugmentOptions& options = {});

std::string augmentation_summary_json(const AugmentationSummary& summary);

}  // namespace nasp

#pragma once

#include <cstddef>
#include <cstdint>

#include "nasp/corpus.hpp"
#include "nasp/rules.hpp"

namespace nasp {

/// Shape of the generated texts and base label frequencies.
struct SyntheticOptions {
    double base_rate = 0.3;              ///< independent prior of each label before rules apply
    std::size_t bag_size = 12;           ///< distinct tokens owned by each label
    std::size_t tokens_per_label = 4;    ///< tokens emitted per active label
    std::size_t filler_tokens = 6;       ///< label-independent tokens per record
    std::size_t filler_vocab = 60;
    double token_dropout = 0.6;          ///< chance an emitted label token is replaced by filler
};

/// Labels are named "L0".."L<k-1>". Planted rules must use those names; a
/// rule naming an index >= vocab_size (or any other name) is rejected.
///
/// Labels are first drawn independently, then planted rules are applied
/// until fixpoint, so the noise-free dataset satisfies every rule. With
/// noise > 0 each (record, rule) pair with an active premise drops the
/// conclusion with probability `noise`, unless another rule still forces it.
/// Texts are built from per-label token bags plus filler.
Dataset generate_synthetic(std::size_t num_records, std::size_t vocab_size, const RuleSet& planted_rules,
                           double noise, std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace nasp

#include "nasp/synthetic.hpp"

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

#include "nasp/error.hpp"
#include "nasp/random.hpp"

namespace nasp {

namespace {

std::size_t synthetic_label_index(const std::string& name, std::size_t vocab_size) {
    std::size_t index = 0;
    const char* first = name.data() + 1;
    const char* last = name.data() + name.size();
    if (name.size() < 2 || name[0] != 'L') {
        throw ConfigError("planted rule label \"" + name + "\" is not of the form L<index>");
    }
    auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("planted rule label \"" + name + "\" is not of the form L<index>");
    }
    if (index >= vocab_size) {
        throw ConfigError("planted rule label \"" + name + "\" is outside a vocabulary of " +
                          std::to_string(vocab_size) + " labels");
    }
    return index;
}

}  // namespace

Dataset generate_synthetic(std::size_t num_records, std::size_t vocab_size, const RuleSet& planted_rules,
                           double noise, std::uint64_t seed, const SyntheticOptions& options) {
    if (vocab_size < 2) throw ConfigError("synthetic vocabulary needs at least two labels");
    if (!(noise >= 0.0 && noise < 0.5)) throw ConfigError("noise must be in [0, 0.5)");
    if (num_records == 0) throw ConfigError("num_records must be positive");
    if (options.bag_size == 0 || options.filler_vocab == 0) throw ConfigError("token bags must be non-empty");

    struct Planted {
        std::size_t premise;
        std::size_t conclusion;
    };
    std::vector<Planted> rules;
    for (const auto& r : planted_rules) {
        rules.push_back({synthetic_label_index(r.premise, vocab_size),
                         synthetic_label_index(r.conclusion, vocab_size)});
    }

    std::vector<std::string> names;
    for (std::size_t j = 0; j < vocab_size; ++j) names.push_back("L" + std::to_string(j));

    Rng rng(seed);
    std::vector<Record> records;
    records.reserve(num_records);
    const int id_width = static_cast<int>(std::to_string(num_records).size());
    std::vector<std::uint8_t> active(vocab_size);
    std::vector<bool> dropped(rules.size());
    std::vector<std::string> tokens;

    for (std::size_t i = 0; i < num_records; ++i) {
        for (auto& a : active) a = rng.bernoulli(options.base_rate) ? 1 : 0;

        for (bool changed = true; changed;) {
            changed = false;
            for (const auto& r : rules) {
                if (active[r.premise] && !active[r.conclusion]) {
                    active[r.conclusion] = 1;
                    changed = true;
                }
            }
        }

        if (noise > 0.0) {
            for (std::size_t k = 0; k < rules.size(); ++k) {
                dropped[k] = active[rules[k].premise] && rng.bernoulli(noise);
            }
            for (std::size_t k = 0; k < rules.size(); ++k) {
                if (!dropped[k]) continue;
                bool forced = false;
                for (std::size_t o = 0; o < rules.size(); ++o) {
                    if (o != k && !dropped[o] && rules[o].conclusion == rules[k].conclusion &&
                        active[rules[o].premise]) {
                        forced = true;
                        break;
                    }
                }
                if (!forced) active[rules[k].conclusion] = 0;
            }
        }

        tokens.clear();
        Record rec;
        for (std::size_t j = 0; j < vocab_size; ++j) {
            if (!active[j]) continue;
            rec.labels.push_back(names[j]);
            for (std::size_t t = 0; t < options.tokens_per_label; ++t) {
                if (rng.bernoulli(options.token_dropout)) {
                    tokens.push_back("w" + std::to_string(rng.below(options.filler_vocab)));
                } else {
                    tokens.push_back("l" + std::to_string(j) + "t" + std::to_string(rng.below(options.bag_size)));
                }
            }
        }
        for (std::size_t t = 0; t < options.filler_tokens; ++t) {
            tokens.push_back("w" + std::to_string(rng.below(options.filler_vocab)));
        }
        rng.shuffle(tokens);
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            if (t) rec.text += ' ';
            rec.text += tokens[t];
        }

        char id[32];
        std::snprintf(id, sizeof id, "syn-%0*zu", id_width, i);
        rec.id = id;
        records.push_back(std::move(rec));
    }
    return make_dataset(std::move(records), LabelVocab(names), Split::train);
}

}  // namespace nasp

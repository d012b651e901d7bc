#include "nasp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "nasp/error.hpp"
#include "nasp/random.hpp"

namespace nasp {

using json = nlohmann::json;

LabelVocab::LabelVocab(std::vector<std::string> names) : labels_(std::move(names)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
}

std::optional<std::size_t> LabelVocab::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t LabelVocab::index(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw VocabularyError(std::string(name));
}

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
    }
    return "train";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "validation" || text == "val") return Split::validation;
    if (text == "test") return Split::test;
    throw ConfigError("unknown split \"" + std::string(text) + "\"");
}

BinaryMatrix Dataset::targets() const {
    BinaryMatrix y(records.size(), vocab.size(), 0);
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& label : records[i].labels) y(i, vocab.index(label)) = 1;
    }
    return y;
}

std::vector<std::string> Dataset::texts() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.text);
    return out;
}

std::vector<std::uint8_t> encode_labels(const Record& record, const LabelVocab& vocab) {
    std::vector<std::uint8_t> v(vocab.size(), 0);
    for (const auto& label : record.labels) v[vocab.index(label)] = 1;
    return v;
}

std::vector<std::string> decode_labels(std::span<const std::uint8_t> multi_hot, const LabelVocab& vocab) {
    if (multi_hot.size() != vocab.size()) {
        throw DimensionError("multi-hot length " + std::to_string(multi_hot.size()) +
                             " does not match vocabulary size " + std::to_string(vocab.size()));
    }
    std::vector<std::string> out;
    for (std::size_t j = 0; j < multi_hot.size(); ++j) {
        if (multi_hot[j]) out.push_back(vocab.name(j));
    }
    return out;
}

namespace {

// Sorts and dedups in place; returns the number of dropped duplicates.
std::size_t normalize_labels(std::vector<std::string>& labels) {
    std::sort(labels.begin(), labels.end());
    const auto before = labels.size();
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return before - labels.size();
}

Record parse_record(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record must be a JSON object", line_no);

    auto string_field = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw ParseError(std::string("missing or non-string field \"") + key + "\"", line_no);
        }
        return it->get<std::string>();
    };

    Record r;
    r.id = string_field("id");
    r.text = string_field("text");
    auto labels = j.find("labels");
    if (labels == j.end() || !labels->is_array()) {
        throw ParseError("missing or non-array field \"labels\"", line_no);
    }
    for (const auto& l : *labels) {
        if (!l.is_string()) throw ParseError("labels must be strings", line_no);
        r.labels.push_back(l.get<std::string>());
    }
    if (r.id.empty()) throw ParseError("empty record id", line_no);
    return r;
}

}  // namespace

Dataset make_dataset(std::vector<Record> records, const std::optional<LabelVocab>& vocab, Split split) {
    Dataset ds;
    ds.split = split;
    std::unordered_set<std::string> ids;
    std::vector<std::string> observed;
    for (auto& r : records) {
        if (r.id.empty()) throw ParseError("empty record id");
        if (!ids.insert(r.id).second) throw ParseError("duplicate record id \"" + r.id + "\"");
        ds.duplicate_label_warnings += normalize_labels(r.labels);
        observed.insert(observed.end(), r.labels.begin(), r.labels.end());
    }
    if (vocab && !vocab->empty()) {
        for (const auto& label : observed) vocab->index(label);
        ds.vocab = *vocab;
    } else {
        ds.vocab = LabelVocab(std::move(observed));
    }
    ds.records = std::move(records);
    return ds;
}

Dataset read_dataset(std::istream& in, const std::optional<LabelVocab>& vocab, Split split) {
    std::vector<Record> records;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Record r = parse_record(line, line_no);
        if (!ids.insert(r.id).second) throw ParseError("duplicate record id \"" + r.id + "\"", line_no);
        if (vocab && !vocab->empty()) {
            for (const auto& label : r.labels) {
                if (!vocab->contains(label)) throw VocabularyError(label);
            }
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw Error("empty dataset");
    return make_dataset(std::move(records), vocab, split);
}

Dataset load_dataset(const std::filesystem::path& path, const std::optional<LabelVocab>& vocab, Split split) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dataset file " + path.string());
    return read_dataset(in, vocab, split);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    for (const auto& r : dataset.records) {
        json j;
        j["id"] = r.id;
        j["text"] = r.text;
        j["labels"] = r.labels;
        out << j.dump() << '\n';
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write dataset file " + path.string());
    write_dataset(out, dataset);
}

DatasetSplits split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
    if (ratios.train <= 0 || ratios.validation < 0 || ratios.train + ratios.validation > 1.0) {
        throw ConfigError("split ratios must satisfy train > 0, validation >= 0, train + validation <= 1");
    }
    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train,
                                static_cast<std::size_t>(std::floor(ratios.validation * static_cast<double>(n))));

    DatasetSplits out;
    auto fill = [&](Dataset& part, Split split, std::size_t begin, std::size_t end) {
        part.vocab = dataset.vocab;
        part.split = split;
        for (std::size_t k = begin; k < end; ++k) part.records.push_back(dataset.records[order[k]]);
    };
    fill(out.train, Split::train, 0, n_train);
    fill(out.validation, Split::validation, n_train, n_train + n_val);
    fill(out.test, Split::test, n_train + n_val, n);
    return out;
}

}  // namespace nasp

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nasp/matrix.hpp"

namespace nasp {

/// One narrative with its label set. `labels` is kept sorted and unique.
struct Record {
    std::string id;
    std::string text;
    std::vector<std::string> labels;

    bool operator==(const Record&) const = default;
};

/// Ordered label names with a name -> position index.
///
/// Positions follow lexicographic (byte-wise) order of the names, so the same
/// label set always yields the same indices no matter how records are ordered.
class LabelVocab {
public:
    LabelVocab() = default;
    /// Sorts and deduplicates `names`.
    explicit LabelVocab(std::vector<std::string> names);

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& name(std::size_t index) const { return labels_.at(index); }

    std::optional<std::size_t> find(std::string_view name) const;
    /// Throws VocabularyError when absent.
    std::size_t index(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name).has_value(); }

    bool operator==(const LabelVocab& other) const { return labels_ == other.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class Split { train, validation, test };

std::string_view to_string(Split split);
/// Accepts "train", "validation"/"val", "test".
Split parse_split(std::string_view text);

struct Dataset {
    std::vector<Record> records;
    LabelVocab vocab;
    Split split = Split::train;
    /// Duplicate labels dropped while loading (one per dropped occurrence).
    std::size_t duplicate_label_warnings = 0;

    std::size_t size() const noexcept { return records.size(); }
    /// N x m multi-hot target matrix in vocab order.
    BinaryMatrix targets() const;
    std::vector<std::string> texts() const;
};

/// Multi-hot vector over `vocab`. Throws VocabularyError on unknown labels.
std::vector<std::uint8_t> encode_labels(const Record& record, const LabelVocab& vocab);
/// Inverse of encode_labels: names of the active positions, in vocab order.
std::vector<std::string> decode_labels(std::span<const std::uint8_t> multi_hot, const LabelVocab& vocab);

/// Parses one JSON object per line with fields `id`, `text`, `labels`.
///
/// Blank lines are skipped. When `vocab` is empty the vocabulary is built from
/// the observed labels; otherwise every label must already be in it.
Dataset read_dataset(std::istream& in, const std::optional<LabelVocab>& vocab = std::nullopt,
                     Split split = Split::train);
Dataset load_dataset(const std::filesystem::path& path,
                     const std::optional<LabelVocab>& vocab = std::nullopt, Split split = Split::train);

void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Builds a dataset from records, normalizing label sets and checking ids.
/// With no vocab, one is built from the records.
Dataset make_dataset(std::vector<Record> records, const std::optional<LabelVocab>& vocab = std::nullopt,
                     Split split = Split::train);

struct SplitRatios {
    double train = 0.8;
    double validation = 0.1;
};

struct DatasetSplits {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Seeded shuffle, then contiguous partition by the ratios (test gets the
/// remainder). All three splits share the vocab of `dataset`.
DatasetSplits split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace nasp

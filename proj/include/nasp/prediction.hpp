#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nasp/corpus.hpp"
#include "nasp/matrix.hpp"

namespace nasp {

/// Per-document probabilities and the thresholded decisions derived from them.
struct PredictionBatch {
    RealMatrix probs;          ///< N x m
    BinaryMatrix decisions;    ///< N x m, decisions(i, j) = probs(i, j) >= thresholds[j]
    LabelVocab vocab;
    std::vector<std::string> doc_ids;
    std::vector<double> thresholds;

    std::size_t num_docs() const noexcept { return decisions.rows(); }
};

/// Structured file: labels, thresholds and one entry per document with its
/// probabilities and decisions.
void save_predictions(const std::filesystem::path& path, const PredictionBatch& batch);
PredictionBatch load_predictions(const std::filesystem::path& path);

}  // namespace nasp

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nasp {

struct VectorizerConfig {
    bool lowercase = true;
    std::size_t min_token_freq = 1;  ///< minimum document frequency
    std::size_t max_features = 20000;

    bool operator==(const VectorizerConfig&) const = default;
};

/// Sparse vector with strictly increasing indices.
struct FeatureVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::size_t dim = 0;

    bool operator==(const FeatureVector&) const = default;
};

/// Splits on runs of non-alphanumeric ASCII and drops tokens shorter than two
/// bytes. Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text, bool lowercase);

/// Fitted TF-IDF feature space.
class Vectorizer {
public:
    Vectorizer() = default;
    Vectorizer(VectorizerConfig config, std::vector<std::string> tokens, std::vector<double> idf,
               std::size_t num_docs);

    std::size_t dim() const noexcept { return tokens_.size(); }
    const VectorizerConfig& config() const noexcept { return config_; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::vector<double>& idf() const noexcept { return idf_; }
    std::size_t num_docs() const noexcept { return num_docs_; }
    /// Feature index of a token, or -1.
    std::int64_t index_of(std::string_view token) const;

    /// tf * idf per in-vocabulary token, L2-normalized; zero vector when no
    /// token is known.
    FeatureVector vectorize(std::string_view text) const;

    /// Stable content hash, used to tie checkpoints to their feature space.
    std::string fingerprint() const;

    bool operator==(const Vectorizer& o) const {
        return config_ == o.config_ && tokens_ == o.tokens_ && idf_ == o.idf_ && num_docs_ == o.num_docs_;
    }

private:
    VectorizerConfig config_;
    std::vector<std::string> tokens_;  // sorted; position = feature index
    std::vector<double> idf_;
    std::size_t num_docs_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Keeps tokens with document frequency >= min_token_freq, the most frequent
/// max_features of them (ties by token), indexed in lexicographic order.
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
Vectorizer fit_vectorizer(const std::vector<std::string>& texts, const VectorizerConfig& config = {});

inline FeatureVector vectorize(std::string_view text, const Vectorizer& vectorizer) {
    return vectorizer.vectorize(text);
}

std::vector<FeatureVector> vectorize_all(const std::vector<std::string>& texts, const Vectorizer& vectorizer);

void save_vectorizer(const std::filesystem::path& path, const Vectorizer& vectorizer);
Vectorizer load_vectorizer(const std::filesystem::path& path);

}  // namespace nasp

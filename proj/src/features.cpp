#include "nasp/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "nasp/error.hpp"

namespace nasp {

using json = nlohmann::json;

namespace {

constexpr int kVectorizerVersion = 1;

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        const auto start = i;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i - start < 2) continue;
        std::string token(text.substr(start, i - start));
        if (lowercase) {
            for (auto& c : token) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        out.push_back(std::move(token));
    }
    return out;
}

Vectorizer::Vectorizer(VectorizerConfig config, std::vector<std::string> tokens, std::vector<double> idf,
                       std::size_t num_docs)
    : config_(config), tokens_(std::move(tokens)), idf_(std::move(idf)), num_docs_(num_docs) {
    if (tokens_.size() != idf_.size()) throw DimensionError("vectorizer token and idf lengths differ");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!std::isfinite(idf_[i]) || idf_[i] < 0.0) throw RangeError("idf values must be finite and >= 0");
        if (i > 0 && !(tokens_[i - 1] < tokens_[i])) throw ParseError("vectorizer tokens must be sorted and unique");
        index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    }
}

std::int64_t Vectorizer::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

FeatureVector Vectorizer::vectorize(std::string_view text) const {
    std::vector<std::uint32_t> hits;
    for (const auto& token : tokenize(text, config_.lowercase)) {
        auto it = index_.find(token);
        if (it != index_.end()) hits.push_back(it->second);
    }
    std::sort(hits.begin(), hits.end());

    FeatureVector v;
    v.dim = dim();
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        while (j < hits.size() && hits[j] == hits[i]) ++j;
        v.indices.push_back(hits[i]);
        v.values.push_back(static_cast<double>(j - i) * idf_[hits[i]]);
        i = j;
    }
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v.values) x /= norm;
    }
    return v;
}

std::string Vectorizer::fingerprint() const {
    // FNV-1a over tokens, idf bit patterns and config.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& t : tokens_) mix(t.data(), t.size() + 1);
    for (double x : idf_) {
        const auto bits = std::bit_cast<std::uint64_t>(x);
        mix(&bits, sizeof bits);
    }
    const std::uint64_t cfg[] = {config_.lowercase, config_.min_token_freq, config_.max_features, num_docs_};
    mix(cfg, sizeof cfg);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Vectorizer fit_vectorizer(const std::vector<std::string>& texts, const VectorizerConfig& config) {
    if (texts.empty()) throw Error("cannot fit a vectorizer on an empty corpus");
    std::unordered_map<std::string, std::size_t> df;
    for (const auto& text : texts) {
        auto tokens = tokenize(text, config.lowercase);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) ++df[t];
    }

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [token, count] : df) {
        if (count >= config.min_token_freq) kept.emplace_back(token, count);
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (kept.size() > config.max_features) kept.resize(config.max_features);
    std::sort(kept.begin(), kept.end());

    const auto n = static_cast<double>(texts.size());
    std::vector<std::string> tokens;
    std::vector<double> idf;
    for (auto& [token, count] : kept) {
        tokens.push_back(token);
        idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return Vectorizer(config, std::move(tokens), std::move(idf), texts.size());
}

std::vector<FeatureVector> vectorize_all(const std::vector<std::string>& texts, const Vectorizer& vectorizer) {
    std::vector<FeatureVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(vectorizer.vectorize(t));
    return out;
}

void save_vectorizer(const std::filesystem::path& path, const Vectorizer& vectorizer) {
    json j;
    j["format"] = "nasp-vectorizer";
    j["version"] = kVectorizerVersion;
    j["config"] = {{"lowercase", vectorizer.config().lowercase},
                   {"min_token_freq", vectorizer.config().min_token_freq},
                   {"max_features", vectorizer.config().max_features}};
    j["num_docs"] = vectorizer.num_docs();
    j["tokens"] = vectorizer.tokens();
    j["idf"] = vectorizer.idf();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write vectorizer " + path.string());
    out << j.dump() << '\n';
}

Vectorizer load_vectorizer(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open vectorizer " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid vectorizer file: ") + e.what());
    }
    if (j.value("format", "") != "nasp-vectorizer" || j.value("version", 0) != kVectorizerVersion) {
        throw ParseError("unsupported vectorizer file " + path.string());
    }
    VectorizerConfig config;
    config.lowercase = j.at("config").at("lowercase").get<bool>();
    config.min_token_freq = j.at("config").at("min_token_freq").get<std::size_t>();
    config.max_features = j.at("config").at("max_features").get<std::size_t>();
    return Vectorizer(config, j.at("tokens").get<std::vector<std::string>>(), j.at("idf").get<std::vector<double>>(),
                      j.at("num_docs").get<std::size_t>());
}

}  // namespace nasp

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nasp/error.hpp"
#include "nasp/features.hpp"
#include "nasp/random.hpp"

using namespace nasp;

namespace {

double norm(const FeatureVector& v) {
    double s = 0.0;
    for (double x : v.values) s += x * x;
    return std::sqrt(s);
}

const std::vector<std::string> kCorpus{"engine failed", "engine fire"};

}  // namespace

TEST_CASE("tokenizer") {
    CHECK(tokenize("Engine-FIRE, a b cd!", true) == std::vector<std::string>{"engine", "fire", "cd"});
    CHECK(tokenize("Engine", false) == std::vector<std::string>{"Engine"});
    CHECK(tokenize("über x", true) == std::vector<std::string>{"über"});
    CHECK(tokenize("", true).empty());
}

TEST_CASE("fit on two texts") {
    const auto v = fit_vectorizer(kCorpus);
    CHECK(v.tokens() == std::vector<std::string>{"engine", "failed", "fire"});
    CHECK(v.idf()[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.idf()[1] == doctest::Approx(std::log(3.0 / 2.0) + 1.0).epsilon(1e-15));
    CHECK(v.index_of("fire") == 2);
    CHECK(v.index_of("nope") == -1);
}

TEST_CASE("min_token_freq filters rare tokens") {
    VectorizerConfig c;
    c.min_token_freq = 2;
    CHECK(fit_vectorizer(kCorpus, c).tokens() == std::vector<std::string>{"engine"});
}

TEST_CASE("max_features keeps the most frequent tokens") {
    VectorizerConfig c;
    c.max_features = 2;
    const auto v = fit_vectorizer({"zz yy xx", "zz yy", "zz"}, c);
    CHECK(v.tokens() == std::vector<std::string>{"yy", "zz"});
    c.max_features = 2;
    // Equal frequencies fall back to token order.
    CHECK(fit_vectorizer({"cc bb aa"}, c).tokens() == std::vector<std::string>{"aa", "bb"});
}

TEST_CASE("fitting is deterministic") {
    CHECK(fit_vectorizer(kCorpus) == fit_vectorizer(kCorpus));
    CHECK(fit_vectorizer(kCorpus).fingerprint() == fit_vectorizer(kCorpus).fingerprint());
    CHECK(fit_vectorizer(kCorpus).fingerprint() != fit_vectorizer({"engine failed", "engine smoke"}).fingerprint());
}

TEST_CASE("empty corpus is rejected") {
    CHECK_THROWS(fit_vectorizer({}));
}

TEST_CASE("vectorize") {
    const auto only_engine = fit_vectorizer({"engine"});
    const auto a = vectorize("engine engine", only_engine);
    REQUIRE(a.indices.size() == 1);
    CHECK(a.values[0] == doctest::Approx(1.0).epsilon(1e-15));

    const auto v = fit_vectorizer(kCorpus);
    const auto oov = vectorize("smoke cabin", v);
    CHECK(oov.indices.empty());
    CHECK(oov.dim == 3);

    const auto b = vectorize("engine failed", v);
    REQUIRE(b.indices.size() == 2);
    // tf-idf by hand: engine 1 * 1.0, failed 1 * (ln 1.5 + 1), then unit length.
    const double e = 1.0, f = std::log(1.5) + 1.0, n = std::sqrt(e * e + f * f);
    CHECK(b.values[0] == doctest::Approx(e / n).epsilon(1e-12));
    CHECK(b.values[1] == doctest::Approx(f / n).epsilon(1e-12));
    CHECK(norm(b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vectors have unit or zero length and are pure") {
    Rng rng(4);
    std::vector<std::string> words{"engine", "fire", "smoke", "cabin", "gear", "bird", "strike", "x"};
    std::vector<std::string> texts;
    for (int i = 0; i < 60; ++i) {
        std::string t;
        const auto len = rng.below(7);
        for (std::size_t k = 0; k < len; ++k) t += words[rng.below(words.size())] + " ";
        texts.push_back(t);
    }
    VectorizerConfig c;
    c.max_features = 5;
    const auto v = fit_vectorizer(texts, c);
    for (const auto& t : texts) {
        const auto x = vectorize(t, v);
        const double n = norm(x);
        CHECK((x.values.empty() ? n == 0.0 : std::abs(n - 1.0) < 1e-12));
        CHECK(x == vectorize(t, v));
        for (std::size_t k = 1; k < x.indices.size(); ++k) CHECK(x.indices[k - 1] < x.indices[k]);
    }
}

TEST_CASE("save and load round trip") {
    const auto dir = testing::scratch("features");
    const auto v = fit_vectorizer({"engine failed", "engine fire", "über smoke"});
    save_vectorizer(dir / "v.json", v);
    const auto back = load_vectorizer(dir / "v.json");
    CHECK(back == v);
    CHECK(back.fingerprint() == v.fingerprint());
    CHECK(vectorize("über engine", back) == vectorize("über engine", v));
}

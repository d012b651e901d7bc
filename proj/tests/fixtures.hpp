#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nasp/corpus.hpp"
#include "nasp/rules.hpp"

namespace nasp::testing {

inline Record rec(std::string id, std::vector<std::string> labels, std::string text = "") {
    return Record{std::move(id), std::move(text), std::move(labels)};
}

inline RuleSet one_rule(std::string a, std::string b, double w = 1.0) {
    Rule r;
    r.premise = std::move(a);
    r.conclusion = std::move(b);
    r.weight = w;
    return RuleSet({r});
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("nasp-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace nasp::testing

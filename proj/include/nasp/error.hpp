#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nasp {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A label name that is not part of the label vocabulary in use.
class VocabularyError : public Error {
public:
    explicit VocabularyError(std::string label)
        : Error("unknown label \"" + label + "\""), label_(std::move(label)) {}
    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

class RangeError : public ParseError {
public:
    using ParseError::ParseError;
};

class DuplicateRuleError : public ParseError {
public:
    using ParseError::ParseError;
};

class SelfImplicationError : public ParseError {
public:
    using ParseError::ParseError;
};

/// A label that cannot be written as a quoted ASP constant.
class EncodingError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Optimization diverged (non-finite loss or parameters).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace nasp

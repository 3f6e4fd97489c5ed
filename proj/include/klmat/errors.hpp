// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace klmat {

// Error categories map to CLI exit codes: config -> 1, data -> 2, numeric -> 3.
enum class ErrorCategory { config = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Invalid hyperparameter or option value.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

/// Malformed input line; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& path, long line, const std::string& message)
        : Error(ErrorCategory::data, path + ":" + std::to_string(line) + ": " + message),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

/// Input file produced no usable ratings.
class EmptyDatasetError : public Error {
public:
    explicit EmptyDatasetError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

/// File could not be opened or written.
class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

/// CSV is missing required columns or rows.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

/// A distribution places mass where the reference distribution has none.
class SupportError : public Error {
public:
    explicit SupportError(const std::string& message) : Error(ErrorCategory::data, message) {}
};

/// Evaluation set has no usable triplets.
class EmptyEvaluationError : public Error {
public:
    explicit EmptyEvaluationError(const std::string& message)
        : Error(ErrorCategory::data, message) {}
};

/// A factor row has (numerically) zero norm, so cosine terms are undefined.
class DegenerateFactorError : public Error {
public:
    explicit DegenerateFactorError(const std::string& message)
        : Error(ErrorCategory::numeric, message) {}
};

/// Non-finite value produced where a finite one is required.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& message) : Error(ErrorCategory::numeric, message) {}
};

/// Power-law estimator is undefined for the given ranks (all equal).
class DegenerateEstimatorError : public Error {
public:
    explicit DegenerateEstimatorError(const std::string& message)
        : Error(ErrorCategory::numeric, message) {}
};

}  // namespace klmat

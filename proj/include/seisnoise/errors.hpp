#pragma once

#include <stdexcept>
#include <string>

namespace seisnoise {

/// Invalid arguments: out-of-range orders, too-short series, malformed configs.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input for which a statistic is undefined (constant series, singular regressions).
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical estimation failed to converge. Specific estimators derive from this
/// and carry their best-so-far result.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message names the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Remote data retrieval failed (HTTP status, truncated payload, sample-rate mismatch).
class FetchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace seisnoise

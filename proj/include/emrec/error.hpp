#pragma once

#include <stdexcept>
#include <string>

namespace emrec {

/// Malformed or unsupported Java source. Carries a 1-based position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int column)
        : std::runtime_error(message + " at " + std::to_string(line) + ":" + std::to_string(column))
        , line_(line)
        , column_(column)
    {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Bad input data: gold datasets, unreadable sources, malformed documents.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Model training or model file problems.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Name-prediction service failures: transport errors and protocol violations.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated function contract (invalid arguments).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace emrec

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace yieldrisk {

// Base for every library error. `exit_code()` follows the CLI contract:
// 2 for bad input, 1 for numerical failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 2; }
    virtual const char* kind() const { return "error"; }
};

class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const override { return "domain_error"; }
};

class SchemaError : public Error {
public:
    using Error::Error;
    const char* kind() const override { return "schema_error"; }
};

// A single malformed input row. `line` is 1-based and counts the header.
class RowError : public Error {
public:
    RowError(std::string source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what),
          source_(std::move(source)),
          line_(line) {}
    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }
    const char* kind() const override { return "row_error"; }

private:
    std::string source_;
    std::size_t line_;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
    const char* kind() const override { return "consistency_error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const override { return "config_error"; }
};

class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 1; }
    const char* kind() const override { return "numerical_error"; }
};

class RankDeficiencyError : public NumericalError {
public:
    RankDeficiencyError(const std::string& what, std::vector<std::string> columns)
        : NumericalError(what), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const { return columns_; }
    const char* kind() const override { return "rank_deficiency"; }

private:
    std::vector<std::string> columns_;
};

// Optimizer ran out of iterations. Carries the last iterate of the variance
// parameters (idiosyncratic first, then one per fitted level).
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate)
        : NumericalError(what), last_iterate_(std::move(last_iterate)) {}
    const std::vector<double>& last_iterate() const { return last_iterate_; }
    const char* kind() const override { return "convergence_error"; }

private:
    std::vector<double> last_iterate_;
};

}  // namespace yieldrisk

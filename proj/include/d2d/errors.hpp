#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace d2d {

// Invalid argument to a mathematical function (outside its domain).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A parameter record or configuration violates one of its invariants.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Quadrature ran out of subdivisions before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A conditional quantity was requested on a probability-zero event.
class DegenerateInputError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Proportional-fair utility is -inf because a rate is zero.
class DegenerateUtilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed configuration text. Carries the 1-based line number (0 if none).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace d2d

#pragma once

#include <stdexcept>
#include <string>

namespace seqdetect {

// Bad user input: malformed spec, unknown field, invalid parameter.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Overflow, non-convergence and other numerical failures.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace seqdetect

#pragma once

#include <stdexcept>
#include <string>

namespace rainfall {

// Bad input or violated precondition. Maps to the "validation" exit code.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A mathematically inadmissible argument, e.g. an Esscher tilt at or above the
// exponential-moment bound.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Solver, quadrature or factorization failure.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] void throw_invalid(const std::string& what);
[[noreturn]] void throw_domain(const std::string& what);
[[noreturn]] void throw_numeric(const std::string& what);

}  // namespace rainfall

#pragma once

#include <stdexcept>
#include <string>

namespace dirmoment {

// Argument outside the mathematical domain of an operation (m = 0, a < -1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Evaluation at (or within the guard distance of) a pole.
class PoleError : public std::domain_error {
public:
    PoleError(const std::string& what, int index) : std::domain_error(what), index_(index) {}
    int index() const { return index_; }

private:
    int index_;
};

// Caller violated a documented precondition (gcd conditions, convergence regime, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Quadrature or truncation could not reach the requested accuracy.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

// Work guard exceeded (brute-force paths at too large a scale).
class ScaleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dirmoment

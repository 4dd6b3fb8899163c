#pragma once

#include <stdexcept>
#include <string>

namespace partsdist {

// Argument outside the mathematical domain of a function or family.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative or adaptive method stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double worst_lower = 0.0, double worst_upper = 0.0,
                     double error_estimate = 0.0)
        : std::runtime_error(what),
          worst_lower_(worst_lower),
          worst_upper_(worst_upper),
          error_estimate_(error_estimate) {}

    // Subinterval carrying the largest error when the method gave up.
    double worst_lower() const noexcept { return worst_lower_; }
    double worst_upper() const noexcept { return worst_upper_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double worst_lower_;
    double worst_upper_;
    double error_estimate_;
};

// A sum, integral or boundary term that should vanish or converge does not.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested operation has no implementation for this object (e.g. no inverse u).
class UnsupportedError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Malformed input data: unreadable file, missing column, unparsable field.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A model fit could not be completed (no finite start, too many failed refits).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace partsdist

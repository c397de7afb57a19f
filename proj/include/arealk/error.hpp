#pragma once

#include <stdexcept>
#include <string>

namespace arealk {

/// Invalid geometry, configuration, or input data. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sampling mechanism cannot produce a pattern with the requested
/// parameters (e.g. zero-weight pool exhausted). CLI exit code 3.
class InfeasibleSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A cached null distribution does not match the study area, radii or
/// observation count it is being applied to. CLI exit code 4.
class CacheMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed its combinatorial budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A statistic is undefined for the given pattern (e.g. no observed units).
class UndefinedStatisticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace arealk

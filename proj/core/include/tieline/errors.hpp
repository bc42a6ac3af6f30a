#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tieline {

/// A model or configuration parameter lies outside its valid domain.
class ParameterDomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The steady state of the thermal system is undefined (no envelope loss).
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class EmptyMarketError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Least-squares fit failed because some feature columns are (numerically)
/// linear combinations of earlier ones.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, std::vector<std::string> degenerate_columns)
        : std::runtime_error(what), degenerate_columns_(std::move(degenerate_columns)) {}

    const std::vector<std::string>& degenerate_columns() const noexcept { return degenerate_columns_; }

private:
    std::vector<std::string> degenerate_columns_;
};

/// A simulation state became non-finite. Carries the control cycle index at
/// which it was detected.
class NumericAbort : public std::runtime_error {
public:
    NumericAbort(const std::string& what, std::size_t cycle)
        : std::runtime_error(what), cycle_(cycle) {}

    std::size_t cycle() const noexcept { return cycle_; }

private:
    std::size_t cycle_;
};

/// Metrics requested over data that cannot support them (short history,
/// mismatched run lengths).
class MetricsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A runtime identity that must hold for every control cycle was broken.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tieline

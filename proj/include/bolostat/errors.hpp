#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bolostat {

/// Argument outside the mathematical domain of an operation (non-finite input,
/// violated type invariant).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Result not representable in double precision.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// A statistic that is undefined for the given input, e.g. g2 at zero flux.
class UndefinedStatisticError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InsufficientDataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Configuration or input-file validation failure. `field()` names the
/// offending entry so the CLI can report it.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Normal equations of a fit are singular. `directions()` lists the
/// parameter combinations that the data cannot constrain, e.g. "center" or
/// "0.71*s_b - 0.70*gamma_bc".
class RankDeficiencyError : public std::runtime_error {
public:
    explicit RankDeficiencyError(std::vector<std::string> directions)
        : std::runtime_error(format(directions)), directions_(std::move(directions)) {}

    const std::vector<std::string>& directions() const noexcept { return directions_; }

private:
    static std::string format(const std::vector<std::string>& dirs) {
        std::string msg = "rank-deficient normal equations; unconstrained direction(s):";
        for (const auto& d : dirs) msg += " [" + d + "]";
        return msg;
    }

    std::vector<std::string> directions_;
};

} // namespace bolostat

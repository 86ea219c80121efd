#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dualstop {

/// Input outside the domain of an operation (bad parameter, prefix outside
/// the support of a process, malformed tree).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A mathematical invariant failed at runtime (negative payout, a level value
/// dipping below zero, a non-blocking flow). Indicates a bug or bad model.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A run would exceed (or has exceeded) its simulator-call ceiling.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, double predicted_calls, double ceiling)
        : std::runtime_error(what), predicted_calls_(predicted_calls), ceiling_(ceiling)
    {
    }

    [[nodiscard]] double predicted_calls() const noexcept { return predicted_calls_; }
    [[nodiscard]] double ceiling() const noexcept { return ceiling_; }

private:
    double predicted_calls_;
    double ceiling_;
};

/// The requested tolerance cannot be certified with the given truncation level.
class ToleranceNotMet : public std::runtime_error {
public:
    ToleranceNotMet(const std::string& what, int required_levels)
        : std::runtime_error(what), required_levels_(required_levels)
    {
    }

    [[nodiscard]] int required_levels() const noexcept { return required_levels_; }

private:
    int required_levels_;
};

}  // namespace dualstop

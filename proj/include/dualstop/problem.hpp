#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualstop/errors.hpp"
#include "dualstop/rng.hpp"

namespace dualstop {

enum class Framework { Minimize, Maximize };

/// Observed history Y_[t]: a D x t real matrix stored column-major.
/// Times are 1-based: column(s) for s in [1, t].
class PathPrefix {
public:
    PathPrefix() = default;
    PathPrefix(int dim, int t, std::vector<double> values);

    static PathPrefix empty(int dim) { return PathPrefix(dim, 0, {}); }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int t() const noexcept { return t_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> column(int s) const;
    [[nodiscard]] double operator()(int row, int s) const { return column(s)[static_cast<std::size_t>(row)]; }

    /// First s columns.
    [[nodiscard]] PathPrefix truncated(int s) const;

    friend bool operator==(const PathPrefix&, const PathPrefix&) = default;

private:
    int dim_ = 1;
    int t_ = 0;
    std::vector<double> values_;
};

/// The base simulator: given the first t columns of a path, draws the
/// remaining columns from the conditional law of the process.
///
/// Implementations are immutable and must be safe to call concurrently; all
/// randomness comes from the stream argument.
class PathSimulator {
public:
    virtual ~PathSimulator() = default;

    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual int horizon() const = 0;

    /// `path` is a column-major D x (at least `upto`) buffer whose first t
    /// columns hold the conditioning prefix. Writes columns t+1..upto only.
    virtual void extend(std::span<double> path, int t, int upto, RandomStream& rng) const = 0;

    /// Throws DomainError if the first t columns are outside the support.
    virtual void validate_prefix(std::span<const double> path, int t) const;
};

/// Payout family g_t. Must depend only on the first t columns of `path`.
class PayoutFunction {
public:
    virtual ~PayoutFunction() = default;
    [[nodiscard]] virtual double operator()(int t, std::span<const double> path) const = 0;
};

struct ProblemTraits {
    std::string name;
    Framework framework = Framework::Minimize;
    /// Almost-sure upper bound U on payouts, when known.
    std::optional<double> bound;
    /// Z_t in [0,1] almost surely; enforced on every evaluation.
    bool normalized = false;
};

/// A stopping problem: base simulator, payout family, horizon and framework.
/// Immutable after construction and cheap to copy.
class StoppingProblem {
public:
    StoppingProblem(std::shared_ptr<const PathSimulator> simulator, std::shared_ptr<const PayoutFunction> payout,
                    ProblemTraits traits);

    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] Framework framework() const noexcept { return traits_.framework; }
    [[nodiscard]] bool normalized() const noexcept { return traits_.normalized; }
    [[nodiscard]] std::optional<double> bound() const noexcept { return traits_.bound; }
    [[nodiscard]] const std::string& name() const noexcept { return traits_.name; }
    [[nodiscard]] const ProblemTraits& traits() const noexcept { return traits_; }
    [[nodiscard]] const PathSimulator& simulator() const noexcept { return *simulator_; }
    [[nodiscard]] std::shared_ptr<const PathSimulator> simulator_ptr() const noexcept { return simulator_; }
    [[nodiscard]] std::shared_ptr<const PayoutFunction> payout_ptr() const noexcept { return payout_; }

    /// Full D x T path agreeing with `prefix` on its first t columns.
    [[nodiscard]] PathPrefix sample_path(const PathPrefix& prefix, RandomStream& rng) const;

    /// g_t evaluated on the first t columns of `prefix`; checks nonnegativity
    /// (and [0,1] when normalized).
    [[nodiscard]] double payout(int t, const PathPrefix& prefix) const;

    /// Same checks on a raw column-major buffer; used by the simulation loops.
    [[nodiscard]] double payout(int t, std::span<const double> path) const
    {
        const double z = (*payout_)(t, path);
        if (!(z >= 0.0) || (traits_.normalized && z > 1.0)) report_bad_payout(t, z);
        return z;
    }

    /// Same process, payouts replaced by `payout` (traits updated by caller).
    [[nodiscard]] StoppingProblem with_payout(std::shared_ptr<const PayoutFunction> payout, ProblemTraits traits) const;

private:
    [[noreturn]] void report_bad_payout(int t, double z) const;

    std::shared_ptr<const PathSimulator> simulator_;
    std::shared_ptr<const PayoutFunction> payout_;
    ProblemTraits traits_;
    int horizon_;
    int dim_;
};

/// g'_t = 1 - min(U, g_t) / U : the truncated, normalized complement used by
/// the maximization framework.
class TruncatedComplementPayout final : public PayoutFunction {
public:
    TruncatedComplementPayout(std::shared_ptr<const PayoutFunction> base, double cap);
    [[nodiscard]] double operator()(int t, std::span<const double> path) const override;
    [[nodiscard]] double cap() const noexcept { return cap_; }

private:
    std::shared_ptr<const PayoutFunction> base_;
    double cap_;
};

/// Problem whose payout is 1 - min(U, Z_t)/U, minimization framework, normalized.
StoppingProblem truncated_complement(const StoppingProblem& problem, double cap);

}  // namespace dualstop

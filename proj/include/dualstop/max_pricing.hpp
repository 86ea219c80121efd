#pragma once

#include <cstdint>
#include <optional>

#include "dualstop/nested_mc.hpp"
#include "dualstop/tree.hpp"

namespace dualstop {

/// Moments of max_t Z_t and gamma0 = M2 / M1^2.
struct MaxMoments {
    double M1 = 0.0;
    double M2 = 0.0;
    double gamma0 = 1.0;
    double M1_std_error = 0.0;
    double M2_std_error = 0.0;
    std::int64_t samples = 0;  ///< 0 for exact moments
};

MaxMoments make_moments(double M1, double M2);

/// Plain Monte Carlo over n unconditioned paths.
MaxMoments estimate_max_moments(const StoppingProblem& problem, std::int64_t n, std::uint64_t seed, int workers = 1);

/// Exact moments on a tree.
MaxMoments exact_max_moments(const FiniteTreeProcess& tree);

struct TruncationLevel {
    double U0 = 0.0;
    double k0 = 0.0;  ///< ceil((U0/M1)^{3/2}); a double since it is routinely ~1e9
};

/// U0 = 1e4 gamma0^3 eps^-2 M1 and k0 = ceil((U0/M1)^{3/2}).
TruncationLevel truncation_level(const MaxMoments& moments, double eps);

struct MaxEstimate {
    Estimate estimate;  ///< value = U (1 - sum_{i<=K} H^-_{U,i})
    double U = 0.0;
    int K = 0;
    /// The estimate is within relative_bound * OPT of OPT:
    /// 7 gamma0^{3/2} (U/M1 ((K+1)^{-1} + |z|) + (U/M1)^{-1/2}), with |z| three
    /// standard errors of the complement sum and moments taken at their
    /// least favourable three-standard-error values.
    double relative_bound = 0.0;
};

/// Maximization by truncation. Strict mode uses U0, k0 and the per-level
/// parameters of the listing, behind the call ceiling. Practical mode takes
/// U and K (both required) and `outer` counts (one for all levels, or K).
MaxEstimate estimate_OPT_max(const StoppingProblem& problem, const MaxMoments& moments, const SampleBudget& budget,
                             std::uint64_t seed, std::optional<double> U = std::nullopt,
                             std::optional<int> K = std::nullopt);

}  // namespace dualstop

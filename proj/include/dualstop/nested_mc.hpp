#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dualstop/budget.hpp"
#include "dualstop/problem.hpp"

namespace dualstop {

struct LevelEstimate {
    int k = 1;
    double H = 0.0;
    double E = 0.0;  ///< running sum H_1 + ... + H_k
    double std_error = 0.0;
    std::int64_t samples = 0;
};

/// Result of a randomized estimator. `std_error` is the CLT standard error
/// of `value` over the outer samples (reported in both modes; the strict
/// mode's guarantee is the (eps, delta) pair itself).
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    BudgetMode mode = BudgetMode::Practical;
    std::uint64_t calls = 0;
    std::uint64_t seed = 0;
    std::vector<LevelEstimate> levels;
};

/// Z^k_t(prefix), t = prefix.t(). Strict mode runs algorithm B^k verbatim;
/// k = 1 returns the payout without touching the simulator. Practical mode
/// averages `outer[0]` (default 1) independent sampled trees.
Estimate estimate_Zk(const StoppingProblem& problem, int k, const PathPrefix& prefix, const SampleBudget& budget,
                     std::uint64_t seed);

/// H_k = E[min_t Z^k_t] (algorithm hB^k in strict mode). Practical mode uses
/// `outer[0]` outer paths.
Estimate estimate_Hk(const StoppingProblem& problem, int k, const SampleBudget& budget, std::uint64_t seed);

/// OPT for a min-framework problem. Strict: sum of ceil(2/eps) level
/// estimates at (eps/(2L), delta/L). Practical: levels 1..outer.size(), the
/// first outer[k-1] paths feeding level k (counts must be nonincreasing).
Estimate estimate_OPT_min(const StoppingProblem& problem, const SampleBudget& budget, std::uint64_t seed);

/// Expansion of the complement 1 - min(U, Z_t)/U (the B^{k,-} family).
Estimate estimate_Hk_minus(const StoppingProblem& problem, int k, double cap, const SampleBudget& budget,
                           std::uint64_t seed);

/// E_k(eta): the first k levels with minima over t in [1, t_eta(T)].
/// In practical mode `outer` gives the per-level counts (or one count for all).
Estimate modified_expansion_estimate(const StoppingProblem& problem, int k, double eta, const SampleBudget& budget,
                                     std::uint64_t seed);

/// Shared practical engine: levels 1..K on outer paths, path i feeding level
/// k when i < counts[k-1] (counts nonincreasing), minima over [1, active].
Estimate practical_levels(const StoppingProblem& problem, const std::vector<std::int64_t>& counts,
                          const SampleBudget& budget, std::uint64_t seed, int active_horizon);

/// Simulator calls a practical run of `practical_levels` will make.
double practical_calls(const std::vector<std::int64_t>& counts, const std::vector<int>& inner, int active_horizon);

/// Simulator calls of a practical rooted estimate of Z^k at depth t.
double practical_rooted_calls(int k, int t, const std::vector<int>& inner, int active_horizon);

}  // namespace dualstop

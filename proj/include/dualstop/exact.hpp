#pragma once

#include <optional>
#include <vector>

#include "dualstop/tree.hpp"

namespace dualstop {

/// Z^k on every node of a tree, plus E[min_{i <= h} Z^k_i | F_t] on every node.
struct LevelValues {
    int k = 1;
    std::vector<double> z;
    std::vector<double> cond_min;
    double H = 0.0;
};

struct LevelRecord {
    int k = 1;
    double H = 0.0;
    double E = 0.0;
    double bound = 0.0;  ///< upper bound on OPT - E_k, NaN when unknown
};

/// Exact expansion on a tree. levels[k-1] holds level k; `next` holds Z^{K+1}.
struct ExactExpansion {
    int active_horizon = 1;  ///< minima run over t in [1, active_horizon]
    std::vector<LevelValues> levels;
    std::vector<double> next;

    [[nodiscard]] int depth() const noexcept { return static_cast<int>(levels.size()); }
    [[nodiscard]] double H(int k) const { return levels.at(static_cast<std::size_t>(k - 1)).H; }
    /// E_k = H_1 + ... + H_k (E_0 = 0).
    [[nodiscard]] double E(int k) const;
    [[nodiscard]] std::vector<LevelRecord> records(double (*bound)(int k) = nullptr) const;
};

/// Levels 1..K of the expansion by one bottom-up pass per level.
/// Throws InvariantViolation if any value within the active horizon drops
/// below -1e-12.
ExactExpansion exact_levels(const FiniteTreeProcess& tree, int K);

/// Same with minima restricted to t in [1, active_horizon]; values after the
/// active horizon may go negative.
ExactExpansion exact_levels(const FiniteTreeProcess& tree, int K, int active_horizon);

/// t_eta(T) = ceil((1 - eta) T).
int eta_horizon(int horizon, double eta);

/// Expansion with minima over the first t_eta(T) periods.
ExactExpansion exact_modified_levels(const FiniteTreeProcess& tree, int K, double eta);

struct MarResult {
    std::vector<double> mar;   ///< MAR_t per node
    std::vector<double> slack;  ///< Z_t - MAR_t = Z^{K+1}_t per node
    double residual = 0.0;      ///< max over root-to-leaf paths of |min_t slack|
};

/// Dual martingale MAR_t = E[sum_{k<=K} min_t Z^k_t | F_t]. Throws
/// ToleranceNotMet when some path has min_t (Z_t - MAR_t) outside [-tol, tol].
MarResult exact_mar(const FiniteTreeProcess& tree, int K, double tol);

/// h_1(x) = (1-x) log(1/(1-x)) composed k times; h_1(1) = 0.
double hk_bound(int k, double x);

/// Inputs to error_bound. Unnormalized problems need E[Z_T^2] and an
/// estimate of OPT; since the bound grows with OPT, pass an upper estimate.
struct BoundStats {
    bool normalized = true;
    std::optional<double> second_moment_last;
    std::optional<double> opt_estimate;
};

/// Upper bound on OPT - E_k: 1/(k+1) when normalized, otherwise
/// 2 (E[Z_T^2]/OPT^2)^{1/3} k^{-1/3} OPT.
double error_bound(const BoundStats& stats, int k);

/// Root-to-leaf node chains, one per leaf, in leaf order.
std::vector<std::vector<int>> tree_paths(const FiniteTreeProcess& tree);

}  // namespace dualstop

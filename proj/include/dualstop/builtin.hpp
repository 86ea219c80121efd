#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dualstop/problem.hpp"
#include "dualstop/tree.hpp"

namespace dualstop {

/// Processes whose columns are independent of the past, each drawn by
/// `column(t, rng)` (1-dimensional). Used by all continuous builtins.
class IndependentColumnsSimulator final : public PathSimulator {
public:
    using ColumnSampler = std::function<double(int t, RandomStream& rng)>;

    IndependentColumnsSimulator(int horizon, ColumnSampler column);

    int dim() const override { return 1; }
    int horizon() const override { return horizon_; }
    void extend(std::span<double> path, int t, int upto, RandomStream& rng) const override;

private:
    int horizon_;
    ColumnSampler column_;
};

/// g_t = Y_t (first row).
class IdentityPayout final : public PayoutFunction {
public:
    double operator()(int t, std::span<const double> path) const override { return path[static_cast<std::size_t>(t - 1)]; }
};

/// Robbins' rank payout: sum_{i<=t} I(Y_i <= Y_t) + (T - t) Y_t.
class RobbinsPayout final : public PayoutFunction {
public:
    explicit RobbinsPayout(int horizon) : horizon_(horizon) {}
    double operator()(int t, std::span<const double> path) const override;

private:
    int horizon_;
};

StoppingProblem iid_uniform(int horizon, Framework framework = Framework::Minimize);
StoppingProblem robbins(int horizon);
/// T = 2, Y_1 = 1/n, Y_2 = 1 w.p. 1/n and 0 otherwise; g = Y.
StoppingProblem two_point(int n);
/// T = 2, Y_1 = 1, Y_2 ~ Exp(1).
StoppingProblem expo_balanced();
/// T = 2, Y_1 = 1/2, Y_2 ~ Exp(1).
StoppingProblem expo_unbalanced();
/// T = 2, Y_1 = 1, Y_2 ~ U[0, 2].
StoppingProblem uniform_balanced();

/// Parses "iid_uniform(4)", "two_point(2)", "robbins(10)", "expo_balanced",
/// "tree(path.json)" and friends. The framework only applies where it is free
/// (iid_uniform and tree); the others have a fixed framework.
StoppingProblem make_builtin(const std::string& spec, Framework framework = Framework::Minimize);

/// Names accepted by make_builtin, for help text.
std::vector<std::string> builtin_names();

// Finite-support versions of the builtins, for the exact engine.

FiniteTreeProcess two_point_tree(int n);
/// Y_1 = 0, Y_2 = 1, Y_3 in {1/2, 1} each w.p. 1/2; g = Y.
FiniteTreeProcess notsurelem_tree();
/// T columns, each uniform on `grid` independently; g = Y.
FiniteTreeProcess iid_grid_tree(int horizon, const std::vector<double>& grid);
/// Midpoint grid of [lo, hi] with `points` cells.
std::vector<double> midpoint_grid(double lo, double hi, int points);
/// T = 2, Y_1 = y1, Y_2 uniform on `grid`.
FiniteTreeProcess two_period_tree(double y1, const std::vector<double>& grid);
/// T = 2, Y_1 = y1, Y_2 ~ Exp(1) discretized by `points` equal-probability
/// cells, each represented by its conditional mean.
FiniteTreeProcess two_period_exponential_tree(double y1, int points);

}  // namespace dualstop

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dualstop {

enum class BudgetMode { PaperStrict, Practical };

std::string to_string(BudgetMode mode);
BudgetMode parse_budget_mode(const std::string& text);

/// Sample sizes for the nested estimators.
///
/// PaperStrict derives every count from N(eps, delta) exactly as the
/// algorithm listings do. Practical takes explicit counts: `outer[k-1]` paths
/// feed the level-k average, and a node spawned g hops below an outer path
/// draws `inner[g]` continuations (the last entry repeats).
struct SampleBudget {
    BudgetMode mode = BudgetMode::Practical;
    double eps = 0.1;
    double delta = 0.1;
    std::vector<std::int64_t> outer;
    std::vector<int> inner{16};
    /// Refuse to start a run predicted to make more simulator calls.
    std::optional<double> max_calls;
    int workers = 1;

    /// Continuations drawn by a node of generation g.
    [[nodiscard]] int inner_at(int g) const;
    void validate() const;
};

/// N(eps, delta) = ceil(log(2/delta) / (2 eps^2)).
std::int64_t budget_N(double eps, double delta);
/// N as a real number, for call predictions that overflow integers.
double budget_N_real(double eps, double delta);

/// f_k(eps, delta) = 10^{2(k-1)^2} eps^{-2(k-1)} (T+2)^{k-1} (1 + log(1/delta) + log(1/eps) + log T)^{k-1}.
/// Infinity when it overflows a double.
double budget_f(int k, double eps, double delta, int horizon);

/// Exact base-simulator calls made by the strict recursions, for minima over
/// `horizon` periods.
double strict_calls_Zk(int k, double eps, double delta, int horizon);
double strict_calls_Hk(int k, double eps, double delta, int horizon);
/// Levels ceil(2/eps), each at (eps / (2L), delta / L).
double strict_calls_OPT(double eps, double delta, int horizon);
int strict_opt_levels(double eps);

}  // namespace dualstop

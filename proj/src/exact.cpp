#include "dualstop/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dualstop {
namespace {

constexpr double kNegativeTolerance = 1e-12;

// E[min_{i<=h} z_i | F_t] for every node, by one bottom-up pass.
std::vector<double> conditional_min(const FiniteTreeProcess& tree, const std::vector<double>& z, int h)
{
    const int n = tree.size();
    std::vector<double> pm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& node = tree.node(i);
        const double above = node.parent < 0 ? std::numeric_limits<double>::infinity() : pm[node.parent];
        pm[i] = node.depth <= h ? std::min(above, z[i]) : above;
    }
    std::vector<double> cm(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        const auto& node = tree.node(i);
        if (node.child_end == node.child_begin) {
            cm[i] = pm[i];
            continue;
        }
        double s = 0.0;
        for (int c = node.child_begin; c < node.child_end; ++c) s += tree.node(c).branch_prob * cm[c];
        cm[i] = s;
    }
    return cm;
}

}  // namespace

double ExactExpansion::E(int k) const
{
    if (k < 0 || k > depth()) throw DomainError("expansion: level out of range");
    double e = 0.0;
    for (int i = 0; i < k; ++i) e += levels[static_cast<std::size_t>(i)].H;
    return e;
}

std::vector<LevelRecord> ExactExpansion::records(double (*bound)(int k)) const
{
    std::vector<LevelRecord> out;
    double e = 0.0;
    for (const auto& lv : levels) {
        e += lv.H;
        out.push_back({lv.k, lv.H, e, bound ? bound(lv.k) : std::numeric_limits<double>::quiet_NaN()});
    }
    return out;
}

ExactExpansion exact_levels(const FiniteTreeProcess& tree, int K)
{
    return exact_levels(tree, K, tree.horizon());
}

ExactExpansion exact_levels(const FiniteTreeProcess& tree, int K, int active_horizon)
{
    if (K < 1) throw DomainError("exact_levels: K must be at least 1");
    if (active_horizon < 1 || active_horizon > tree.horizon())
        throw DomainError("exact_levels: active horizon outside [1,T]");

    ExactExpansion run;
    run.active_horizon = active_horizon;
    std::vector<double> z(static_cast<std::size_t>(tree.size()));
    for (int i = 0; i < tree.size(); ++i) z[i] = tree.node(i).payout;

    for (int k = 1; k <= K; ++k) {
        LevelValues lv;
        lv.k = k;
        lv.cond_min = conditional_min(tree, z, active_horizon);
        for (int r = 0; r < tree.root_count(); ++r) lv.H += tree.node(r).branch_prob * lv.cond_min[r];

        std::vector<double> next(z.size());
        for (int i = 0; i < tree.size(); ++i) {
            next[i] = z[i] - lv.cond_min[i];
            if (tree.node(i).depth <= active_horizon && next[i] < -kNegativeTolerance) {
                std::ostringstream os;
                os << "exact_levels: Z^" << (k + 1) << " = " << next[i] << " at node " << tree.node(i).id;
                throw InvariantViolation(os.str());
            }
        }
        lv.z = std::move(z);
        z = std::move(next);
        run.levels.push_back(std::move(lv));
    }
    run.next = std::move(z);
    return run;
}

int eta_horizon(int horizon, double eta)
{
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0,1)");
    // guard against (1-eta)*T landing a hair above an integer
    const double x = (1.0 - eta) * horizon;
    const double r = std::round(x);
    const int h = std::abs(x - r) < 1e-9 ? static_cast<int>(r) : static_cast<int>(std::ceil(x));
    return std::clamp(h, 1, horizon);
}

ExactExpansion exact_modified_levels(const FiniteTreeProcess& tree, int K, double eta)
{
    return exact_levels(tree, K, eta_horizon(tree.horizon(), eta));
}

std::vector<std::vector<int>> tree_paths(const FiniteTreeProcess& tree)
{
    std::vector<std::vector<int>> paths;
    for (int i = 0; i < tree.size(); ++i)
        if (tree.is_leaf(i)) paths.push_back(tree.ancestry(i));
    return paths;
}

MarResult exact_mar(const FiniteTreeProcess& tree, int K, double tol)
{
    if (!(tol > 0.0)) throw DomainError("exact_mar: tolerance must be positive");
    const auto run = exact_levels(tree, K);
    MarResult out;
    out.mar.assign(static_cast<std::size_t>(tree.size()), 0.0);
    for (const auto& lv : run.levels)
        for (int i = 0; i < tree.size(); ++i) out.mar[i] += lv.cond_min[i];
    out.slack = run.next;

    for (const auto& path : tree_paths(tree)) {
        double m = std::numeric_limits<double>::infinity();
        for (int i : path) m = std::min(m, out.slack[i]);
        out.residual = std::max(out.residual, std::abs(m));
    }
    if (out.residual > tol) {
        const double u = std::max(tree.max_payout(), tol);
        const double need = std::ceil(u / tol);
        const int required = need > std::numeric_limits<int>::max() ? std::numeric_limits<int>::max() : static_cast<int>(need);
        std::ostringstream os;
        os << "exact_mar: residual " << out.residual << " exceeds tol " << tol << " at K=" << K << "; K=" << required
           << " guarantees it";
        throw ToleranceNotMet(os.str(), required);
    }
    return out;
}

double hk_bound(int k, double x)
{
    if (k < 1) throw DomainError("hk_bound: k must be at least 1");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("hk_bound: x must lie in [0,1]");
    for (int i = 0; i < k; ++i) x = x >= 1.0 ? 0.0 : -(1.0 - x) * std::log1p(-x);
    return x;
}

double error_bound(const BoundStats& stats, int k)
{
    if (k < 1) throw DomainError("error_bound: k must be at least 1");
    if (stats.normalized) return 1.0 / (k + 1.0);
    if (!stats.second_moment_last || !stats.opt_estimate)
        throw DomainError("error_bound: unnormalized problems need E[Z_T^2] and an OPT estimate");
    const double opt = *stats.opt_estimate;
    if (!(opt > 0.0)) return 0.0;
    return 2.0 * std::cbrt(*stats.second_moment_last / (opt * opt)) * std::pow(k, -1.0 / 3.0) * opt;
}

}  // namespace dualstop

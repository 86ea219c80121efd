#include "dualstop/verify.hpp"

#include <algorithm>
#include <cmath>

#include "dualstop/errors.hpp"
#include "dualstop/exact.hpp"
#include "dualstop/oracles.hpp"

namespace dualstop {
namespace {

constexpr double kTol = 1e-12;

Check make_check(std::string name, double residual, double tolerance = kTol)
{
    Check c;
    c.name = std::move(name);
    c.residual = residual;
    c.tolerance = tolerance;
    c.pass = residual <= tolerance;
    return c;
}

Check failed(std::string name, const std::exception& e)
{
    Check c;
    c.name = std::move(name);
    c.residual = std::numeric_limits<double>::infinity();
    c.pass = false;
    c.note = e.what();
    return c;
}

}  // namespace

bool VerifyReport::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

VerifyReport verify_tree(const FiniteTreeProcess& tree, int K, std::string instance, double max_rules)
{
    if (K < 0) throw DomainError("verify: K must be nonnegative");
    VerifyReport report;
    report.instance = std::move(instance);
    const double opt = backward_induction(tree).opt;

    if (count_stopping_rules(tree) <= max_rules) {
        report.checks.push_back(make_check("dp_vs_brute_force", std::abs(opt - brute_force_opt(tree, Framework::Minimize, max_rules))));
    } else {
        Check c;
        c.name = "dp_vs_brute_force";
        c.note = "skipped: too many stopping rules";
        report.checks.push_back(c);
    }

    const auto net = build_flow_network(tree);
    const auto flow = max_flow(net);
    report.checks.push_back(make_check("dp_vs_max_flow", std::abs(opt - flow.value)));
    try {
        const auto m = flow_to_martingale(net, flow);
        double domination = 0.0;
        double tower = 0.0;
        for (int i = 0; i < tree.size(); ++i) {
            const auto& n = tree.node(i);
            domination = std::max(domination, m[i] - n.payout);
            if (tree.is_leaf(i)) continue;
            double s = 0.0;
            for (int c = n.child_begin; c < n.child_end; ++c) s += tree.node(c).branch_prob * m[c];
            tower = std::max(tower, std::abs(s - m[i]));
        }
        double saturation = 0.0;
        for (const auto& path : tree_paths(tree)) {
            double lo = std::numeric_limits<double>::infinity();
            for (int i : path) lo = std::min(lo, tree.node(i).payout - m[i]);
            saturation = std::max(saturation, std::abs(lo));
        }
        report.checks.push_back(make_check("martingale_tower", tower));
        report.checks.push_back(make_check("martingale_domination", std::max(0.0, domination)));
        report.checks.push_back(make_check("martingale_saturation", saturation));
    } catch (const DomainError& e) {
        report.checks.push_back(failed("flow_martingale", e));
    }

    if (K == 0) return report;
    ExactExpansion run;
    try {
        run = exact_levels(tree, K);
    } catch (const InvariantViolation& e) {
        report.checks.push_back(failed("expansion_nonnegative", e));
        return report;
    }
    const double U = tree.max_payout();
    double sandwich = 0.0;
    double pathwise = 0.0;
    double rounds = 0.0;
    const auto paths = tree_paths(tree);
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
        const double gap = opt - run.E(k);
        const double upper = tree.max_payout() <= 1.0 ? 1.0 / (k + 1) : std::numeric_limits<double>::infinity();
        sandwich = std::max({sandwich, -gap, gap - upper});
        const auto& z = run.levels[static_cast<std::size_t>(k - 1)].z;
        for (const auto& path : paths) {
            double lo = std::numeric_limits<double>::infinity();
            for (int i : path) lo = std::min(lo, z[i]);
            pathwise = std::max(pathwise, lo - U / k);
        }
        total += round_flow(tree, run, k).value;
        rounds = std::max(rounds, std::abs(total - run.E(k)));
    }
    report.checks.push_back(make_check("gap_sandwich", std::max(0.0, sandwich)));
    report.checks.push_back(make_check("pathwise_min", std::max(0.0, pathwise)));
    report.checks.push_back(make_check("round_flow_identity", rounds));
    return report;
}

}  // namespace dualstop

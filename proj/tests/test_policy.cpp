#include "doctest.h"

#include <cmath>

#include "dualstop/analytics.hpp"
#include "dualstop/builtin.hpp"
#include "dualstop/exact.hpp"
#include "dualstop/oracles.hpp"
#include "dualstop/policy.hpp"
#include "support.hpp"

using namespace dualstop;

TEST_CASE("tau_k on small examples")
{
    auto tp = two_point_tree(2);
    auto r2 = tau_k_exact(tp, 2);
    CHECK(r2.stop[0]);
    CHECK(r2.value == 0.5);
    auto r1 = tau_k_exact(tp, 1);
    CHECK(r1.stop[0]);

    auto ns = notsurelem_tree();
    for (int k = 1; k <= 5; ++k) {
        auto r = tau_k_exact(ns, k);
        CHECK(r.stop[0]);
        CHECK(r.value == 0.0);
    }
    CHECK_THROWS_AS(tau_k_exact(two_point_tree(2).map_payouts([](const TreeNode& n) { return 2 * n.payout; }), 2),
                    DomainError);
}

TEST_CASE("tau_k dominance chain and the level identity")
{
    for (const auto& tree : testing::random_tree_suite(100, 2024)) {
        const double opt = backward_induction(tree).opt;
        for (int k : {1, 2, 3, 5, 10}) {
            auto r = tau_k_exact(tree, k);
            CHECK(r.value >= opt - 1e-12);
            CHECK(r.value - opt <= 1.0 / k + 1e-12);
        }

        // E[Z_tau] = E[Z^k_tau] + sum_{i<k} H_i for any rule, here tau_3
        auto run = exact_levels(tree, 4);
        auto rule = tau_k_exact(tree, 3);
        for (int k = 1; k <= 4; ++k) {
            auto zk = tree.map_payouts([&](const TreeNode& n) {
                const int i = static_cast<int>(&n - tree.nodes().data());
                return std::max(0.0, run.levels[k - 1].z[i]);
            });
            CHECK(std::abs(rule.value - (rule_value(zk, rule.stop) + run.E(k - 1))) <= 1e-12);
        }
    }
}

TEST_CASE("tau_star")
{
    CHECK(std::abs(tau_star_exact(two_point_tree(2), 40, 1e-10).value - 0.5) <= 1e-9);

    std::vector<TreeNodeSpec> chain{{0, std::nullopt, 1.0, 0.7, {}}, {1, 0, 1.0, 0.2, {}}, {2, 1, 1.0, 0.4, {}}};
    FiniteTreeProcess path(1, 3, chain);
    auto r = tau_star_exact(path, 50, 1e-10);
    CHECK_FALSE(r.stop[0]);
    CHECK(r.stop[1]);
    CHECK(r.value == 0.2);

    for (const auto& tree : testing::random_tree_suite(50, 3)) {
        if (tree.horizon() > 3) continue;
        const int K = 5000;
        const double tol = std::max(1e-10, tree.max_payout() / K);
        auto rule = tau_star_exact(tree, K, tol);
        CHECK(std::abs(rule.value - backward_induction(tree).opt) <= tree.horizon() * tol);
    }
}

TEST_CASE("policy evaluation")
{
    auto u = iid_uniform(5);
    auto ev = evaluate_policy(u, FixedTimePolicy(1), 100000, 1);
    CHECK(std::abs(ev.mean - 0.5) <= 3 * ev.std_error);
    CHECK(ev.mean_stop_time == 1.0);

    auto tree = std::make_shared<const FiniteTreeProcess>(testing::random_tree_suite(5, 12)[3]);
    auto p = tree_problem(tree, Framework::Minimize);
    auto vf = backward_induction(*tree);
    auto dp = evaluate_policy(p, TreeRulePolicy(tree, vf.stop), 20000, 5);
    CHECK(std::abs(dp.mean - vf.opt) <= 3 * dp.std_error + 1e-12);

    auto r10 = tau_k_exact(*tree, 10);
    auto sim = evaluate_policy(p, TreeRulePolicy(tree, r10.stop), 20000, 6);
    CHECK(std::abs(sim.mean - r10.value) <= 3 * sim.std_error + 1e-12);

    CHECK_THROWS_AS(evaluate_policy(u, FixedTimePolicy(1), 0, 1), DomainError);
}

TEST_CASE("tau_eps")
{
    SampleBudget b;
    b.outer = {1};
    b.inner = {8};
    auto tp = two_point(2);
    TauEpsPolicy pol(tp, 0.5, b);
    CHECK(pol.level() == 8);
    auto ep = run_episode(tp, pol, 3);
    REQUIRE(ep.trace.size() == 1);
    CHECK(ep.stop_time == 1);
    CHECK(ep.trace[0].statistic <= 0.25);
    CHECK(std::abs(ep.trace[0].statistic - 0.5 * std::pow(0.5, 8)) <= 0.05);

    // one period: stop at once, no statistic
    auto one = iid_uniform(1);
    auto e1 = run_episode(one, TauEpsPolicy(one, 0.5, b), 1);
    CHECK(e1.stop_time == 1);
    CHECK(std::isnan(e1.trace[0].statistic));

    // reproducible traces
    auto u = iid_uniform(4);
    TauEpsPolicy pu(u, 0.5, b);
    auto a = run_episode(u, pu, 77);
    auto c = run_episode(u, pu, 77);
    REQUIRE(a.trace.size() == c.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].statistic == c.trace[i].statistic);

    auto ev = evaluate_policy(u, pu, 1000, 9);
    CHECK(ev.mean <= iid_uniform_opt(4) + 0.5 + 3 * ev.std_error);

    // a ceiling too small aborts with the trace so far
    SampleBudget tight = b;
    tight.max_calls = 1;
    TauEpsPolicy pt(u, 0.5, tight);
    CHECK_THROWS_AS(run_episode(u, pt, 1), PolicyAborted);

    CHECK_THROWS_AS(TauEpsPolicy(expo_balanced(), 0.5, b), DomainError);
}

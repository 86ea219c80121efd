#include "doctest.h"

#include <cmath>
#include <limits>

#include "dualstop/builtin.hpp"
#include "dualstop/exact.hpp"
#include "dualstop/oracles.hpp"
#include "support.hpp"

using namespace dualstop;

TEST_CASE("two_point levels")
{
    auto run = exact_levels(two_point_tree(2), 10);
    CHECK(run.H(1) == 0.25);
    CHECK(run.H(2) == 0.125);
    for (int k = 1; k <= 10; ++k) CHECK(run.H(k) == std::ldexp(1.0, -(k + 1)));

    for (int n : {2, 3, 4, 10}) {
        auto r = exact_levels(two_point_tree(n), 30);
        for (int k = 1; k <= 30; ++k)
            CHECK(std::abs((1.0 / n - r.E(k)) - (1.0 / n) * std::pow(1.0 - 1.0 / n, k)) <= 1e-12);
    }
}

TEST_CASE("notsurelem tree has a flat expansion")
{
    auto run = exact_levels(notsurelem_tree(), 5);
    for (int k = 1; k <= 5; ++k) CHECK(run.H(k) == 0.0);
    CHECK(run.E(5) == 0.0);
}

TEST_CASE("single period: E_1 is the mean")
{
    std::vector<TreeNodeSpec> nodes{{0, std::nullopt, 0.3, 0.2, {}}, {1, std::nullopt, 0.7, 0.9, {}}};
    FiniteTreeProcess tree(1, 1, nodes);
    auto run = exact_levels(tree, 3);
    CHECK(run.E(1) == doctest::Approx(0.3 * 0.2 + 0.7 * 0.9).epsilon(1e-15));
    CHECK(run.H(2) == 0.0);
    CHECK_THROWS_AS(exact_levels(tree, 0), DomainError);
}

TEST_CASE("level invariants on random trees")
{
    for (const auto& tree : testing::random_tree_suite(100, 2024)) {
        const int K = 20;
        auto run = exact_levels(tree, K);
        const double opt = backward_induction(tree).opt;
        const double u = tree.max_payout();
        const auto paths = tree_paths(tree);
        for (int k = 1; k <= K; ++k) {
            const auto& lv = run.levels[k - 1];
            const auto& next = k < K ? run.levels[k].z : run.next;
            for (int i = 0; i < tree.size(); ++i) {
                CHECK(next[i] >= -1e-12);
                CHECK(next[i] <= lv.z[i] + 1e-12);
            }
            CHECK(lv.H >= 0.0);
            CHECK(lv.H <= opt / k + 1e-12);
            const double gap = opt - run.E(k);
            CHECK(gap >= -1e-12);
            CHECK(gap <= 1.0 / (k + 1) + 1e-12);
            for (const auto& path : paths) {
                double m = std::numeric_limits<double>::infinity();
                for (int i : path) m = std::min(m, lv.z[i]);
                CHECK(m <= u / k + 1e-12);
            }
        }
        // telescoping at the leaves
        for (const auto& path : paths) {
            double sum = 0.0;
            for (const auto& lv : run.levels) {
                double m = std::numeric_limits<double>::infinity();
                for (int i : path) m = std::min(m, lv.z[i]);
                sum += m;
            }
            const int leaf = path.back();
            CHECK(std::abs(run.next[leaf] - (tree.node(leaf).payout - sum)) <= 1e-12);
        }
    }
}

TEST_CASE("eta horizon and the modified expansion")
{
    CHECK(eta_horizon(10, 0.3) == 7);
    CHECK(eta_horizon(50, 0.3) == 35);
    CHECK(eta_horizon(4, 0.01) == 4);
    CHECK_THROWS_AS(eta_horizon(10, 0.0), DomainError);
    CHECK_THROWS_AS(eta_horizon(10, 1.0), DomainError);

    for (const auto& tree : testing::random_tree_suite(40, 77)) {
        auto std_run = exact_levels(tree, 3);
        auto mod = exact_modified_levels(tree, 3, 1e-6);
        for (int k = 1; k <= 3; ++k) CHECK(std::abs(std_run.H(k) - mod.H(k)) <= 1e-12);

        const int h = eta_horizon(tree.horizon(), 0.4);
        auto eta_run = exact_levels(tree, 8, h);
        // OPT of the problem restricted to [1, h]
        auto restricted = tree.map_payouts([&](const TreeNode& n) { return n.depth <= h ? n.payout : 0.0; });
        std::vector<double> v(tree.size());
        for (int i = tree.size() - 1; i >= 0; --i) {
            const auto& n = tree.node(i);
            if (n.depth >= h) {
                v[i] = n.payout;
                continue;
            }
            double c = 0.0;
            for (int ch = n.child_begin; ch < n.child_end; ++ch) c += tree.node(ch).branch_prob * v[ch];
            v[i] = std::min(n.payout, c);
        }
        double opt_eta = 0.0;
        for (int r = 0; r < tree.root_count(); ++r) opt_eta += tree.node(r).branch_prob * v[r];
        for (int k = 1; k <= 8; ++k) CHECK(eta_run.E(k) <= opt_eta + 1e-12);
    }
}

TEST_CASE("exact MAR")
{
    auto ns = exact_mar(notsurelem_tree(), 10, 1e-10);
    for (double m : ns.mar) CHECK(m == 0.0);

    auto tp = exact_mar(two_point_tree(2), 40, 1e-10);
    CHECK(std::abs(tp.mar[0] - 0.5) <= 1e-10);

    auto zero = two_point_tree(2).map_payouts([](const TreeNode&) { return 0.0; });
    for (double m : exact_mar(zero, 3, 1e-10).mar) CHECK(m == 0.0);

    // martingale and 0-sure-optimality on random trees
    for (const auto& tree : testing::random_tree_suite(30, 5)) {
        const int K = 4000;
        const double tol = std::max(1e-10, tree.max_payout() / K);
        auto r = exact_mar(tree, K, tol);
        for (int i = 0; i < tree.size(); ++i) {
            const auto& n = tree.node(i);
            if (n.child_end == n.child_begin) continue;
            double s = 0.0;
            for (int c = n.child_begin; c < n.child_end; ++c) s += tree.node(c).branch_prob * r.mar[c];
            CHECK(std::abs(s - r.mar[i]) <= 1e-10);
        }
    }

    // tolerance that K cannot deliver
    bool thrown = false;
    try {
        (void)exact_mar(two_point_tree(2), 2, 1e-6);
    } catch (const ToleranceNotMet& e) {
        thrown = true;
        CHECK(e.required_levels() == 1000000);
    }
    CHECK(thrown);
}

TEST_CASE("iterated prophet bound")
{
    CHECK(hk_bound(1, 0.0) == 0.0);
    CHECK(hk_bound(1, 1.0) == 0.0);
    CHECK(hk_bound(1, 0.5) == doctest::Approx(0.346574).epsilon(1e-6));
    CHECK(hk_bound(2, 0.5) == doctest::Approx(0.2779).epsilon(1e-3));
    for (int i = 0; i <= 1000; ++i) CHECK(hk_bound(1, i / 1000.0) <= std::exp(-1.0) + 1e-15);
    CHECK_THROWS_AS(hk_bound(1, 1.5), DomainError);
    CHECK_THROWS_AS(hk_bound(1, -0.1), DomainError);

    // OPT - E_k <= h_k(OPT) on random trees
    for (const auto& tree : testing::random_tree_suite(50, 31)) {
        const double opt = backward_induction(tree).opt;
        auto run = exact_levels(tree, 5);
        for (int k = 1; k <= 5; ++k) CHECK(opt - run.E(k) <= hk_bound(k, opt) + 1e-12);
    }
}

TEST_CASE("error bounds")
{
    BoundStats normalized;
    CHECK(error_bound(normalized, 9) == doctest::Approx(0.1));
    CHECK(error_bound(normalized, 1) == 0.5);

    for (int k = 1; k <= 4; ++k) {
        auto run = exact_levels(two_point_tree(4), k);
        CHECK(0.25 - run.E(k) >= 1.0 / 16);
    }

    BoundStats raw;
    raw.normalized = false;
    CHECK_THROWS_AS(error_bound(raw, 3), DomainError);

    // unnormalized trees, bound evaluated at the exact OPT
    for (const auto& base : testing::random_tree_suite(50, 404)) {
        auto tree = base.map_payouts([](const TreeNode& n) { return 10.0 * n.payout * n.payout; });
        const double opt = backward_induction(tree).opt;
        double m2 = 0.0;
        for (const auto& n : tree.nodes())
            if (tree.is_leaf(&n - tree.nodes().data())) m2 += n.path_prob * n.payout * n.payout;
        raw.second_moment_last = m2;
        raw.opt_estimate = opt;
        auto run = exact_levels(tree, 10);
        for (int k = 1; k <= 10; ++k) CHECK(opt - run.E(k) <= error_bound(raw, k) + 1e-12);
    }
}

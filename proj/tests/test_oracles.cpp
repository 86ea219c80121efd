#include "doctest.h"

#include <cmath>
#include <sstream>

#include "dualstop/builtin.hpp"
#include "dualstop/oracles.hpp"
#include "support.hpp"

using namespace dualstop;

TEST_CASE("backward induction values")
{
    CHECK(backward_induction(two_point_tree(2)).opt == 0.5);
    CHECK(backward_induction(notsurelem_tree()).opt == 0.0);
    auto grid = iid_grid_tree(2, {0.25, 0.75});
    CHECK(backward_induction(grid, Framework::Maximize).opt == 0.625);
    CHECK(brute_force_opt(grid, Framework::Maximize) == 0.625);
    CHECK(brute_force_opt(two_point_tree(2)) == 0.5);
}

TEST_CASE("brute force refuses large trees")
{
    auto big = iid_grid_tree(4, midpoint_grid(0, 1, 8));
    CHECK_THROWS_AS(brute_force_opt(big), DomainError);
}

TEST_CASE("dynamic program, enumeration and max flow agree")
{
    for (const auto& tree : testing::tiny_tree_suite(50, 17)) {
        const double dp = backward_induction(tree).opt;
        CHECK(std::abs(brute_force_opt(tree) - dp) <= 1e-12);
        auto net = build_flow_network(tree);
        auto flow = max_flow(net);
        CHECK(std::abs(flow.value - dp) <= 1e-12);

        auto m = flow_to_martingale(net, flow);
        for (int i = 0; i < tree.size(); ++i) {
            const auto& n = tree.node(i);
            CHECK(m[i] <= n.payout + 1e-12);
            if (n.child_end == n.child_begin) continue;
            double s = 0.0;
            for (int c = n.child_begin; c < n.child_end; ++c) s += tree.node(c).branch_prob * m[c];
            CHECK(std::abs(s - m[i]) <= 1e-10);
        }
        for (const auto& path : tree_paths(tree)) {
            bool touched = false;
            for (int i : path) touched = touched || std::abs(m[i] - tree.node(i).payout) <= 1e-10;
            CHECK(touched);
        }
        double mean = 0.0;
        for (int r = 0; r < tree.root_count(); ++r) mean += tree.node(r).branch_prob * m[r];
        CHECK(std::abs(mean - dp) <= 1e-12);

        // the cut read off the flow is an optimal stopping rule
        CHECK(std::abs(rule_value(tree, min_cut_stopping(net, flow)) - dp) <= 1e-12);
        // the DP rule too
        CHECK(std::abs(rule_value(tree, backward_induction(tree).stop) - dp) <= 1e-12);
    }
}

TEST_CASE("flow edge cases and validation")
{
    auto zero = two_point_tree(2).map_payouts([](const TreeNode&) { return 0.0; });
    auto net = build_flow_network(zero);
    auto flow = max_flow(net);
    CHECK(flow.value == 0.0);
    for (double m : flow_to_martingale(net, flow)) CHECK(m == 0.0);

    auto tp = two_point_tree(2);
    auto tnet = build_flow_network(tp);
    auto tflow = max_flow(tnet);
    CHECK(tflow.value == 0.5);
    CHECK(flow_to_martingale(tnet, tflow)[0] == 0.5);

    Flow half = tflow;
    for (auto& f : half.edge) f *= 0.5;
    CHECK_THROWS_AS(flow_to_martingale(tnet, half), DomainError);  // not blocking

    Flow leaky = tflow;
    leaky.edge[2] = 0.25;
    CHECK_THROWS_AS(flow_to_martingale(tnet, leaky), DomainError);  // not conserved

    std::ostringstream os;
    write_edge_list(os, tnet, tflow);
    CHECK(os.str() == "s 0 0.5 0.5\n0 1 0 0\n0 2 0.5 0.5\n1 t inf 0\n2 t inf 0.5\n");
}

TEST_CASE("round flows")
{
    auto tp = two_point_tree(2);
    auto run = exact_levels(tp, 20);
    CHECK(round_flow(tp, run, 1).value == 0.25);
    double total = 0.0;
    for (int k = 1; k <= 20; ++k) total += round_flow(tp, run, k).value;
    CHECK(std::abs(total - run.E(20)) <= 1e-12);
    CHECK_THROWS_AS(round_flow(tp, run, 0), DomainError);

    for (const auto& tree : testing::random_tree_suite(100, 2024)) {
        auto r = exact_levels(tree, 20);
        auto net = build_flow_network(tree);
        std::vector<double> cumulative(tree.size(), 0.0);
        double sum = 0.0;
        for (int k = 1; k <= 20; ++k) {
            auto f = round_flow(tree, r, k);
            sum += f.value;
            CHECK(std::abs(sum - r.E(k)) <= 1e-12);
            for (int i = 0; i < tree.size(); ++i) {
                cumulative[i] += f.edge[i];
                CHECK(cumulative[i] <= net.capacity[i] + 1e-12);
            }
        }
    }
}

#include "doctest.h"

#include <cmath>

#include "dualstop/builtin.hpp"
#include "dualstop/exact.hpp"
#include "dualstop/nested_mc.hpp"
#include "support.hpp"

using namespace dualstop;

namespace {

SampleBudget strict(double eps, double delta)
{
    SampleBudget b;
    b.mode = BudgetMode::PaperStrict;
    b.eps = eps;
    b.delta = delta;
    return b;
}

SampleBudget practical(std::vector<std::int64_t> outer, std::vector<int> inner = {16})
{
    SampleBudget b;
    b.outer = std::move(outer);
    b.inner = std::move(inner);
    return b;
}

}  // namespace

TEST_CASE("sample-size formulas")
{
    CHECK(budget_N(0.1, 0.05) == 185);
    CHECK(budget_f(1, 0.3, 0.2, 7) == 1.0);
    CHECK(budget_f(2, 0.1, 0.05, 4) == doctest::Approx(4.61e5).epsilon(1e-3));
    CHECK_THROWS_AS(budget_N(0.0, 0.1), DomainError);
    CHECK_THROWS_AS(budget_N(0.1, 1.0), DomainError);
    CHECK_THROWS_AS(budget_f(0, 0.1, 0.1, 2), DomainError);
    CHECK(std::isinf(budget_f(40, 0.01, 0.01, 10)));
    CHECK(strict_opt_levels(0.3) == 7);
}

TEST_CASE("strict call accounting follows the recursion and stays under f")
{
    auto p = two_point(2);
    const double eps = 0.9;
    const double delta = 0.9;
    for (int k = 1; k <= 3; ++k) {
        auto e = estimate_Zk(p, k, PathPrefix(1, 1, {0.5}), strict(eps, delta), 3);
        CHECK(static_cast<double>(e.calls) == strict_calls_Zk(k, eps, delta, 2));
        CHECK(strict_calls_Zk(k, eps, delta, 2) <= budget_f(k, eps, delta, 2));
        if (k >= 2) {
            const double n = budget_N(eps / 4, delta / 4);
            const double inner = strict_calls_Zk(k - 1, eps / 4, delta / (4 * n * 2), 2);
            CHECK(strict_calls_Zk(k, eps, delta, 2) == n * (1 + 2 * inner) + strict_calls_Zk(k - 1, eps / 2, delta / 2, 2));
        }

        auto h = estimate_Hk(p, k, strict(eps, delta), 4);
        CHECK(static_cast<double>(h.calls) == strict_calls_Hk(k, eps, delta, 2));
        CHECK(strict_calls_Hk(k, eps, delta, 2) <= budget_f(k + 1, eps, delta, 2));
    }

    auto u = iid_uniform(3);
    auto e = estimate_Zk(u, 3, PathPrefix(1, 1, {0.5}), strict(0.95, 0.95), 1);
    CHECK(static_cast<double>(e.calls) == strict_calls_Zk(3, 0.95, 0.95, 3));
}

TEST_CASE("level one is the payout")
{
    auto p = two_point(2);
    for (auto b : {strict(0.1, 0.1), practical({10})}) {
        auto e = estimate_Zk(p, 1, PathPrefix(1, 1, {0.5}), b, 1);
        CHECK(e.value == 0.5);
        CHECK(e.calls == 0);
    }
}

TEST_CASE("strict B^2 on two_point(2)")
{
    auto p = two_point(2);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto e = estimate_Zk(p, 2, PathPrefix(1, 1, {0.5}), strict(0.1, 0.1), seed);
        hits += std::abs(e.value - 0.25) <= 0.1;
    }
    CHECK(hits >= 90);
}

TEST_CASE("constant payouts collapse after level one")
{
    std::vector<TreeNodeSpec> nodes{{0, std::nullopt, 1.0, 0.4, {}}, {1, 0, 0.5, 0.4, {}}, {2, 0, 0.5, 0.4, {}}};
    auto tree = std::make_shared<const FiniteTreeProcess>(1, 2, nodes);
    auto p = tree_problem(tree, Framework::Minimize);
    for (int k = 2; k <= 3; ++k) {
        auto e = estimate_Zk(p, k, PathPrefix(1, 1, {0.0}), strict(0.9, 0.9), 5);
        CHECK(std::abs(e.value) <= 0.9);
        auto q = estimate_Zk(p, k, PathPrefix(1, 1, {0.0}), practical({4}), 5);
        CHECK(std::abs(q.value) <= 1e-12);
    }
    auto h = estimate_Hk(p, 1, practical({100}), 3);
    CHECK(h.value == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("strict hB^1 on two_point(2)")
{
    auto p = two_point(2);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        hits += std::abs(estimate_Hk(p, 1, strict(0.05, 0.05), seed).value - 0.25) <= 0.05;
    CHECK(hits >= 95);
}

TEST_CASE("practical H_1 of iid_uniform(3)")
{
    auto p = iid_uniform(3);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        hits += std::abs(estimate_Hk(p, 1, practical({100000}), seed).value - 0.25) <= 0.01;
    CHECK(hits >= 95);
}

TEST_CASE("complement expansion")
{
    auto constant = std::make_shared<const FiniteTreeProcess>(
        FiniteTreeProcess(1, 2, {{0, std::nullopt, 1.0, 0.3, {}}, {1, 0, 1.0, 0.3, {}}}));
    auto p = tree_problem(constant, Framework::Maximize);
    CHECK(estimate_Hk_minus(p, 1, 2.0, practical({50}), 1).value == doctest::Approx(1.0 - 0.3 / 2.0).epsilon(1e-12));
    CHECK(estimate_Hk_minus(p, 1, 0.2, practical({50}), 1).value == 0.0);
    CHECK_THROWS_AS(estimate_Hk_minus(p, 1, 0.0, practical({50}), 1), DomainError);

    auto two = iid_uniform(2, Framework::Maximize);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        hits += std::abs(estimate_Hk_minus(two, 1, 1.0, strict(0.05, 0.05), seed).value - 1.0 / 3.0) <= 0.05;
    CHECK(hits >= 95);
}

TEST_CASE("practical engine tracks the exact expansion on a tree")
{
    auto tree = std::make_shared<const FiniteTreeProcess>(iid_grid_tree(3, {0.1, 0.5, 0.9}));
    auto exact = exact_levels(*tree, 3);
    auto p = tree_problem(tree, Framework::Minimize);
    auto e = estimate_OPT_min(p, practical({6000, 6000, 6000}, {32}), 9);
    for (int k = 1; k <= 3; ++k) CHECK(std::abs(e.levels[k - 1].E - exact.E(k)) <= 4 * e.std_error + 0.01);
    CHECK(e.std_error > 0.0);
}

TEST_CASE("practical calls match the prediction and the ceiling refuses")
{
    auto p = iid_uniform(4);
    auto b = practical({200, 50, 10}, {5, 3});
    auto e = estimate_OPT_min(p, b, 2);
    CHECK(static_cast<double>(e.calls) == practical_calls(b.outer, b.inner, 4));

    auto z = estimate_Zk(p, 3, PathPrefix(1, 2, {0.3, 0.6}), practical({7}, {4, 2}), 2);
    CHECK(static_cast<double>(z.calls) == 7 * practical_rooted_calls(3, 2, {4, 2}, 4));

    b.max_calls = 10;
    CHECK_THROWS_AS(estimate_OPT_min(p, b, 2), BudgetExceeded);
    auto s = strict(0.3, 0.1);
    s.max_calls = 1e8;
    CHECK_THROWS_AS(estimate_OPT_min(two_point(2), s, 7), BudgetExceeded);
}

TEST_CASE("input validation")
{
    auto b = practical({10, 20});
    CHECK_THROWS_AS(estimate_OPT_min(iid_uniform(3), b, 1), DomainError);  // increasing counts
    CHECK_THROWS_AS(estimate_OPT_min(iid_uniform(3, Framework::Maximize), practical({10}), 1), DomainError);
    CHECK_THROWS_AS(estimate_Hk(expo_balanced(), 1, strict(0.1, 0.1), 1), DomainError);
    CHECK_THROWS_AS(estimate_Hk(iid_uniform(2), 0, practical({10}), 1), DomainError);
    CHECK_THROWS_AS(estimate_Zk(iid_uniform(2), 2, PathPrefix::empty(1), practical({10}), 1), DomainError);
    CHECK_THROWS_AS(estimate_Hk(iid_uniform(2), 1, strict(1.5, 0.1), 1), DomainError);
    CHECK_THROWS_AS(modified_expansion_estimate(iid_uniform(5), 1, 1.2, practical({10}), 1), DomainError);
}

TEST_CASE("results do not depend on the worker count")
{
    auto p = iid_uniform(4);
    auto b = practical({3000, 500, 100});
    auto one = estimate_OPT_min(p, b, 42);
    b.workers = 4;
    auto four = estimate_OPT_min(p, b, 42);
    CHECK(one.value == four.value);
    CHECK(one.std_error == four.std_error);
    CHECK(one.calls == four.calls);

    auto s = strict(0.2, 0.2);
    auto a = estimate_Hk(two_point(2), 2, s, 8);
    s.workers = 3;
    auto c = estimate_Hk(two_point(2), 2, s, 8);
    CHECK(a.value == c.value);
    CHECK(a.calls == c.calls);
}

TEST_CASE("modified expansion")
{
    auto p = iid_uniform(50);
    auto e = modified_expansion_estimate(p, 1, 0.3, practical({20000}), 3);
    CHECK(std::abs(e.value - 1.0 / 36.0) <= 3 * e.std_error);

    // t_eta = T reproduces the standard estimate exactly
    auto q = iid_uniform(4);
    auto a = modified_expansion_estimate(q, 2, 0.01, practical({500}, {4}), 5);
    auto b = estimate_OPT_min(q, practical({500, 500}, {4}), 5);
    CHECK(a.value == b.value);

    // Robbins: minima over the first t_eta periods stay nonnegative
    auto r = modified_expansion_estimate(robbins(10), 2, 0.3, practical({500}, {4}), 2);
    CHECK(r.levels[0].H >= 0.0);
    CHECK(r.levels[1].H >= -3 * r.levels[1].std_error);
}

#include "doctest.h"

#include <cmath>

#include "dualstop/builtin.hpp"

using namespace dualstop;

TEST_CASE("sample_path keeps the prefix and fills the rest")
{
    auto p = iid_uniform(3);
    RandomStream rng(11);
    auto path = p.sample_path(PathPrefix::empty(1), rng);
    REQUIRE(path.t() == 3);
    for (int s = 1; s <= 3; ++s) {
        CHECK(path(0, s) >= 0.0);
        CHECK(path(0, s) < 1.0);
    }

    PathPrefix prefix(1, 2, {0.25, 0.75});
    for (int i = 0; i < 20; ++i) {
        auto full = p.sample_path(prefix, rng);
        CHECK(full.truncated(2) == prefix);
    }

    PathPrefix whole(1, 3, {0.1, 0.2, 0.3});
    CHECK(p.sample_path(whole, rng) == whole);
}

TEST_CASE("sample_path is a function of the stream")
{
    auto p = robbins(6);
    RandomStream a(5);
    RandomStream b(5);
    CHECK(p.sample_path(PathPrefix::empty(1), a) == p.sample_path(PathPrefix::empty(1), b));
    auto c = RandomStream(5).child(1);
    auto d = RandomStream(5).child(2);
    CHECK_FALSE(p.sample_path(PathPrefix::empty(1), c) == p.sample_path(PathPrefix::empty(1), d));
}

TEST_CASE("notsurelem tree continues (0,1) with 1/2 or 1 evenly")
{
    auto tree = std::make_shared<const FiniteTreeProcess>(notsurelem_tree());
    auto p = tree_problem(tree, Framework::Minimize);
    PathPrefix prefix(1, 2, {0.0, 1.0});
    RandomStream rng(3);
    int halves = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        auto path = p.sample_path(prefix, rng);
        const double y3 = path(0, 3);
        REQUIRE((y3 == 0.5 || y3 == 1.0));
        halves += y3 == 0.5;
    }
    CHECK(std::abs(halves / double(n) - 0.5) < 0.02);

    CHECK_THROWS_AS((void)p.sample_path(PathPrefix(1, 2, {0.0, 0.5}), rng), DomainError);
}

TEST_CASE("payouts")
{
    auto r = robbins(3);
    PathPrefix path(1, 3, {0.5, 0.2, 0.9});
    CHECK(r.payout(2, path) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(r.payout(3, path) == 3.0);  // rank of 0.9 among the three
    CHECK(r.payout(1, path) == 1.0 + 2 * 0.5);

    // ties count: I(Y_i <= Y_t)
    PathPrefix ties(1, 3, {0.4, 0.4, 0.1});
    CHECK(r.payout(2, ties) == 2.0 + 0.4);

    auto u = iid_uniform(2);
    CHECK(u.payout(1, PathPrefix(1, 2, {0.7, 0.1})) == 0.7);

    auto tp = two_point(2);
    RandomStream rng(1);
    for (int i = 0; i < 100; ++i) {
        auto full = tp.sample_path(PathPrefix::empty(1), rng);
        CHECK(tp.payout(1, full) == 0.5);
        const double z2 = tp.payout(2, full);
        CHECK((z2 == 0.0 || z2 == 1.0));
    }
}

TEST_CASE("Robbins payout at T is the rank of Y_T")
{
    auto r = robbins(7);
    RandomStream rng(21);
    for (int rep = 0; rep < 200; ++rep) {
        auto path = r.sample_path(PathPrefix::empty(1), rng);
        int rank = 0;
        for (int i = 1; i <= 7; ++i) rank += path(0, i) <= path(0, 7);
        CHECK(r.payout(7, path) == rank);
    }
}

TEST_CASE("normalized problems stay in [0,1] and bad payouts are reported")
{
    auto p = iid_uniform(5);
    RandomStream rng(8);
    for (int i = 0; i < 100000 / 5; ++i) {
        auto path = p.sample_path(PathPrefix::empty(1), rng);
        for (int t = 1; t <= 5; ++t) {
            const double z = p.payout(t, path);
            REQUIRE(z >= 0.0);
            REQUIRE(z <= 1.0);
        }
    }

    ProblemTraits traits{"bad", Framework::Minimize, 1.0, true};
    auto bad = uniform_balanced().with_payout(std::make_shared<IdentityPayout>(), traits);
    CHECK_THROWS_AS((void)bad.payout(1, PathPrefix(1, 2, {1.5, 0.0})), InvariantViolation);
}

TEST_CASE("truncated complement payout")
{
    auto p = iid_uniform(2, Framework::Maximize);
    auto c = truncated_complement(p, 2.0);
    CHECK(c.normalized());
    CHECK(c.framework() == Framework::Minimize);
    CHECK(c.payout(1, PathPrefix(1, 2, {0.5, 0.0})) == 0.75);
    CHECK_THROWS_AS(truncated_complement(p, 0.0), DomainError);

    auto small = truncated_complement(p, 0.25);
    CHECK(small.payout(1, PathPrefix(1, 2, {0.5, 0.0})) == 0.0);
}

TEST_CASE("builtin specs")
{
    CHECK(make_builtin("two_point(2)").horizon() == 2);
    CHECK(make_builtin("iid_uniform(4)").horizon() == 4);
    CHECK(make_builtin("iid_uniform(4)", Framework::Maximize).framework() == Framework::Maximize);
    CHECK(make_builtin("uniform_balanced").bound() == 2.0);
    CHECK_FALSE(make_builtin("expo_balanced").normalized());
    CHECK_THROWS_AS(make_builtin("nope"), DomainError);
    CHECK_THROWS_AS(make_builtin("iid_uniform(x)"), DomainError);
    CHECK_THROWS_AS(make_builtin("iid_uniform"), DomainError);
    CHECK_THROWS_AS(make_builtin("expo_balanced(3)"), DomainError);
    CHECK_THROWS_AS(make_builtin("two_point(1)"), DomainError);
    CHECK_THROWS_AS(make_builtin("tree(/nonexistent.json)"), DomainError);

    auto ub = uniform_balanced();
    RandomStream rng(4);
    for (int i = 0; i < 1000; ++i) {
        auto path = ub.sample_path(PathPrefix::empty(1), rng);
        CHECK(path(0, 1) == 1.0);
        CHECK(path(0, 2) >= 0.0);
        CHECK(path(0, 2) < 2.0);
    }
}

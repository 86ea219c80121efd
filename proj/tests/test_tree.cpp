#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "dualstop/builtin.hpp"
#include "support.hpp"

using namespace dualstop;
using nlohmann::json;

namespace {

json two_point_json()
{
    return json::parse(R"({"D":1,"T":2,"nodes":[
        {"id":10,"parent":null,"branch_prob":1.0,"payout":0.5},
        {"id":11,"parent":10,"branch_prob":0.5,"payout":0.0},
        {"id":12,"parent":10,"branch_prob":0.5,"payout":1.0}]})");
}

}  // namespace

TEST_CASE("tree from json")
{
    auto tree = FiniteTreeProcess::from_json(two_point_json());
    CHECK(tree.size() == 3);
    CHECK(tree.root_count() == 1);
    CHECK(tree.node(0).id == 10);
    CHECK(tree.node(2).path_prob == 0.5);
    CHECK(tree.is_leaf(1));
    CHECK(tree.max_payout() == 1.0);

    // default state values are the ids
    std::vector<double> path{10.0, 12.0};
    CHECK(tree.locate(path, 2) == 2);
    CHECK(tree.locate(path, 0) == -1);
    CHECK(tree.ancestry(2) == std::vector<int>{0, 2});
}

TEST_CASE("tree json round trip through a file")
{
    auto tree = two_point_tree(3);
    auto file = std::filesystem::temp_directory_path() / "dualstop_tree_roundtrip.json";
    tree.save(file.string());
    auto back = FiniteTreeProcess::load(file.string());
    std::filesystem::remove(file);
    REQUIRE(back.size() == tree.size());
    for (int i = 0; i < tree.size(); ++i) {
        CHECK(back.node(i).payout == tree.node(i).payout);
        CHECK(back.node(i).branch_prob == tree.node(i).branch_prob);
        CHECK(back.node(i).value == tree.node(i).value);
    }
}

TEST_CASE("malformed trees are rejected")
{
    auto j = two_point_json();
    j["nodes"][1]["branch_prob"] = 0.6;  // siblings sum to 1.1
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    j = two_point_json();
    j["nodes"][2]["parent"] = 99;
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    j = two_point_json();
    j["nodes"][2]["id"] = 11;
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    j = two_point_json();
    j["T"] = 3;  // leaves short of the horizon
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    j = two_point_json();
    j["nodes"][1]["payout"] = -0.1;
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    j = two_point_json();
    j["nodes"][1]["value"] = 7.0;
    j["nodes"][2]["value"] = 7.0;
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    j = two_point_json();
    j["nodes"][0].erase("payout");
    CHECK_THROWS_AS(FiniteTreeProcess::from_json(j), DomainError);

    CHECK_THROWS_AS(FiniteTreeProcess::load("/nonexistent/tree.json"), DomainError);
}

TEST_CASE("breadth-first order and sibling probabilities")
{
    for (const auto& tree : testing::random_tree_suite(30, 99)) {
        for (int i = 0; i < tree.size(); ++i) {
            const auto& n = tree.node(i);
            if (n.parent >= 0) CHECK(n.parent < i);
            if (n.child_end > n.child_begin) {
                double s = 0.0;
                for (int c = n.child_begin; c < n.child_end; ++c) {
                    CHECK(tree.node(c).parent == i);
                    s += tree.node(c).branch_prob;
                }
                CHECK(std::abs(s - 1.0) <= 1e-12);
            } else {
                CHECK(n.depth == tree.horizon());
            }
            CHECK(n.payout <= 1.0);
        }
    }
}

TEST_CASE("random trees are a function of the stream")
{
    RandomTreeOptions o;
    o.horizon = 4;
    auto a = random_tree(o, RandomStream(5)).to_json();
    auto b = random_tree(o, RandomStream(5)).to_json();
    auto c = random_tree(o, RandomStream(6)).to_json();
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("stopping rule count")
{
    // two_point: stop at t=1, or continue and stop at each leaf
    CHECK(count_stopping_rules(two_point_tree(2)) == 2.0);
    // single path of length 3: stop at 1, 2 or 3
    std::vector<TreeNodeSpec> chain{{0, std::nullopt, 1.0, 0.1, {}}, {1, 0, 1.0, 0.2, {}}, {2, 1, 1.0, 0.3, {}}};
    CHECK(count_stopping_rules(FiniteTreeProcess(1, 3, chain)) == 3.0);
    // notsurelem: stop at 1; stop at 2; continue to both leaves
    CHECK(count_stopping_rules(notsurelem_tree()) == 3.0);

    RandomTreeOptions o;
    o.horizon = 4;
    o.max_stopping_rules = 50;
    for (std::uint64_t s = 0; s < 10; ++s) CHECK(count_stopping_rules(random_tree(o, RandomStream(s))) <= 50);
}

TEST_CASE("grid trees")
{
    auto t = iid_grid_tree(2, {0.25, 0.75});
    CHECK(t.size() == 6);
    auto e = two_period_exponential_tree(1.0, 100);
    double mean = 0.0;
    for (int i = 1; i < e.size(); ++i) mean += e.node(i).branch_prob * e.node(i).payout;
    CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
}

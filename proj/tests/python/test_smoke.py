import math

import pytest

import dualstop as ds


def test_exact_two_point():
    tree = ds.two_point_tree(2)
    assert ds.backward_induction(tree) == 0.5
    assert ds.brute_force_opt(tree) == 0.5
    assert ds.max_flow_value(tree) == 0.5
    levels = ds.exact_levels(tree, 10)
    for k, e in enumerate(levels["E"], start=1):
        assert abs(0.5 - e - ds.two_point_gap(2, k)) < 1e-12
    assert ds.verify(tree, 10)["pass"]


def test_random_trees_sandwich():
    for tree in ds.random_tree_suite(20, 3):
        opt = ds.backward_induction(tree)
        E = ds.exact_levels(tree, 8)["E"]
        for k, e in enumerate(E, start=1):
            assert -1e-12 <= opt - e <= 1.0 / (k + 1) + 1e-12


def test_practical_estimate_and_determinism():
    problem = ds.make_problem("iid_uniform(4)")
    assert problem.horizon == 4 and problem.normalized
    budget = ds.SampleBudget(outer=[20000, 5000, 1000], inner=[16])
    a = ds.estimate_OPT_min(problem, budget, seed=5)
    budget.workers = 2
    b = ds.estimate_OPT_min(problem, budget, seed=5)
    assert a.record() == b.record()
    assert abs(a.value - ds.iid_uniform_opt(4)) < 0.05
    assert [lv.k for lv in a.levels] == [1, 2, 3]


def test_strict_budget_refused():
    budget = ds.SampleBudget(mode="strict", eps=0.3, delta=0.1, max_calls=1e8)
    with pytest.raises(ds.BudgetExceeded):
        ds.estimate_OPT_min(ds.make_problem("two_point(2)"), budget, seed=1)


def test_bad_input():
    with pytest.raises(ValueError):
        ds.make_problem("no_such_problem")
    with pytest.raises(ValueError):
        ds.MaxMoments(0.0, 0.0)


def test_max_and_policy():
    problem = ds.make_problem("iid_uniform(2)", "max")
    moments = ds.MaxMoments(2.0 / 3.0, 0.5)
    assert math.isclose(moments.gamma0, 9.0 / 8.0)
    est = ds.estimate_OPT_max(problem, moments, ds.SampleBudget(outer=[5000], inner=[32]), seed=2, U=20.0, K=40)
    assert abs(est.value - 0.625) < 0.05

    u = ds.make_problem("iid_uniform(5)")
    ev = ds.evaluate_policy(u, ds.FixedTimePolicy(1), 20000, seed=1)
    assert abs(ev.mean - 0.5) < 4 * ev.std_error
    pol = ds.TauEpsPolicy(ds.make_problem("two_point(2)"), 0.5, ds.SampleBudget(outer=[1], inner=[8]))
    assert pol.level == 8


def test_cli():
    code, record, _ = ds.run_cli("converge", "--problem", "two_point(2)", "--levels", "4")
    assert code == 0
    assert [r["gap"] for r in record["rows"]] == [r["formula_gap"] for r in record["rows"]]
    code, record, log = ds.run_cli("price", "--problem", "two_point(2)", "--outer", "10")
    assert code == 2 and "seed" in log

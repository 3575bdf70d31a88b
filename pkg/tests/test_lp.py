"""Exact simplex: hand-checked instances, degeneracy, and transport plans."""

import random
from fractions import Fraction

import pytest

from pgsos.lp import Infeasible, Unbounded, lp_feasible, simplex_min, solve_transport

from helpers import transport_bruteforce

F = Fraction


def test_simplex_min_equality_only():
    # min x0 + 2*x1  s.t.  x0 + x1 = 1  ->  all mass on x0
    value, x = simplex_min([F(1), F(2)], [[F(1), F(1)]], [F(1)])
    assert value == 1
    assert x == [F(1), F(0)]


def test_simplex_min_with_upper_bounds():
    # min -x0 - x1  s.t.  x0 + 2*x1 <= 4, 3*x0 + x1 <= 6  (classic corner)
    value, x = simplex_min([F(-1), F(-1)], [], [],
                           [[F(1), F(2)], [F(3), F(1)]], [F(4), F(6)])
    assert value == F(-14, 5)
    assert x[0] == F(8, 5) and x[1] == F(6, 5)


def test_simplex_exactness_no_float_noise():
    value, _ = simplex_min([F(1, 3), F(1, 7)], [[F(1), F(1)]], [F(1)])
    assert value == F(1, 7)


def test_simplex_detects_infeasible():
    with pytest.raises(Infeasible):
        simplex_min([F(1)], [[F(1)]], [F(-1)])  # x = -1 with x >= 0
    with pytest.raises(Infeasible):
        simplex_min([F(0), F(0)],
                    [[F(1), F(1)], [F(1), F(1)]], [F(1), F(2)])


def test_simplex_detects_unbounded():
    with pytest.raises(Unbounded):
        simplex_min([F(-1)], [], [])


def test_lp_feasible():
    assert lp_feasible([[F(1), F(1)]], [F(1)])
    assert not lp_feasible([[F(1)]], [F(-2)])


def test_degenerate_instance_terminates():
    # multiple tight constraints at the optimum; Bland's rule must not cycle
    value, _ = simplex_min(
        [F(0), F(0), F(1)],
        [[F(1), F(1), F(1)]], [F(1)],
        [[F(1), F(0), F(0)], [F(0), F(1), F(0)]], [F(0), F(0)])
    assert value == 1


def test_transport_identity_is_free():
    cost = [[F(0), F(1)], [F(1), F(0)]]
    value, plan = solve_transport(cost, [F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)])
    assert value == 0
    assert plan[0][0] == F(1, 2) and plan[1][1] == F(1, 2)


def test_transport_unbalanced_supports():
    # move 1 unit from a single pile to two piles at costs 1/10 and 1
    cost = [[F(1, 10), F(1)]]
    value, plan = solve_transport(cost, [F(1)], [F(9, 10), F(1, 10)])
    assert value == F(9, 10) * F(1, 10) + F(1, 10) * F(1)
    assert plan == [[F(9, 10), F(1, 10)]]


def test_transport_plan_is_feasible_and_optimal_randomized():
    rng = random.Random(17)
    for _ in range(25):
        m, n = rng.randint(1, 4), rng.randint(1, 4)
        cost = [[F(rng.randint(0, 6), rng.randint(1, 6)) for _ in range(n)]
                for _ in range(m)]
        supply = _random_simplex_point(rng, m)
        demand = _random_simplex_point(rng, n)
        value, plan = solve_transport(cost, supply, demand)
        # marginals
        for i in range(m):
            assert sum(plan[i]) == supply[i]
        for j in range(n):
            assert sum(plan[i][j] for i in range(m)) == demand[j]
        assert all(q >= 0 for row in plan for q in row)
        assert value == sum(plan[i][j] * cost[i][j]
                            for i in range(m) for j in range(n))
        assert value == transport_bruteforce(cost, supply, demand)


def _random_simplex_point(rng: random.Random, k: int) -> list[Fraction]:
    """k nonnegative rationals summing to one (zero entries are permitted)."""
    cuts = sorted(rng.randint(0, 30) for _ in range(k - 1))
    out, prev = [], 0
    for c in cuts + [30]:
        out.append(F(c - prev, 30))
        prev = c
    return out

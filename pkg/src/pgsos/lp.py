"""Exact linear programming over rationals.

A small dense two-phase simplex with Bland's anti-cycling rule, specialised
to the sizes that show up here: optimal-transport problems between finite
distributions (a handful of support points each) and feasibility checks for
coupling constraints.  Everything is :class:`fractions.Fraction`, so optima
are exact and ties are decided without tolerances.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Infeasible(Exception):
    """The constraint system has no non-negative solution."""


class Unbounded(Exception):
    """The objective can be driven to -infinity over the feasible region."""


def simplex_min(cost: Sequence[Fraction],
                a_eq: Sequence[Sequence[Fraction]],
                b_eq: Sequence[Fraction],
                a_ub: Sequence[Sequence[Fraction]] = (),
                b_ub: Sequence[Fraction] = ()) -> tuple[Fraction, list[Fraction]]:
    """Minimise ``cost . x`` subject to ``a_eq x = b_eq``, ``a_ub x <= b_ub``
    and ``x >= 0``.  Returns ``(optimal value, optimal x)``.
    """
    n = len(cost)
    n_ub = len(a_ub)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for row, b in zip(a_eq, b_eq):
        assert len(row) == n
        rows.append([Fraction(v) for v in row] + [ZERO] * n_ub)
        rhs.append(Fraction(b))
    for k, (row, b) in enumerate(zip(a_ub, b_ub)):
        assert len(row) == n
        slack = [ZERO] * n_ub
        slack[k] = ONE
        rows.append([Fraction(v) for v in row] + slack)
        rhs.append(Fraction(b))
    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]

    # one artificial variable per row; they form the starting basis
    width = n + n_ub
    for i in range(m):
        art = [ZERO] * m
        art[i] = ONE
        rows[i] = rows[i] + art
    basis = [width + i for i in range(m)]
    total = width + m

    phase1 = [ZERO] * width + [ONE] * m
    _optimise(rows, rhs, basis, phase1, total, allow=total)
    if sum(phase1[basis[i]] * rhs[i] for i in range(m)) != 0:
        raise Infeasible
    _drive_out_artificials(rows, rhs, basis, width)

    phase2 = [Fraction(c) for c in cost] + [ZERO] * (total - n)
    _optimise(rows, rhs, basis, phase2, total, allow=width)

    x = [ZERO] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = rhs[i]
    value = sum((Fraction(cost[j]) * x[j] for j in range(n)), ZERO)
    return value, x


def _optimise(rows: list[list[Fraction]], rhs: list[Fraction],
              basis: list[int], cost: list[Fraction],
              total: int, allow: int) -> None:
    """Run simplex iterations in place; ``allow`` bounds entering columns."""
    while True:
        in_basis = set(basis)
        entering = -1
        for j in range(allow):
            if j in in_basis:
                continue
            rc = cost[j] - sum(cost[basis[i]] * rows[i][j]
                               for i in range(len(rows))
                               if cost[basis[i]] != 0 and rows[i][j] != 0)
            if rc < 0:
                entering = j
                break  # Bland: smallest improving index
        if entering < 0:
            return
        leaving = -1
        best: Fraction | None = None
        for i in range(len(rows)):
            if rows[i][entering] > 0:
                ratio = rhs[i] / rows[i][entering]
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leaving]):
                    best = ratio
                    leaving = i
        if leaving < 0:
            raise Unbounded
        _pivot(rows, rhs, basis, leaving, entering)


def _pivot(rows: list[list[Fraction]], rhs: list[Fraction],
           basis: list[int], r: int, c: int) -> None:
    piv = rows[r][c]
    rows[r] = [v / piv for v in rows[r]]
    rhs[r] = rhs[r] / piv
    for i in range(len(rows)):
        if i != r and rows[i][c] != 0:
            factor = rows[i][c]
            rows[i] = [v - factor * w for v, w in zip(rows[i], rows[r])]
            rhs[i] = rhs[i] - factor * rhs[r]
    basis[r] = c


def _drive_out_artificials(rows: list[list[Fraction]], rhs: list[Fraction],
                           basis: list[int], width: int) -> None:
    """Replace basic artificials (all at value 0 here) by real columns,
    dropping rows that turn out to be redundant constraints."""
    i = 0
    while i < len(rows):
        if basis[i] >= width:
            pivot_col = next((j for j in range(width) if rows[i][j] != 0), -1)
            if pivot_col < 0:
                del rows[i], rhs[i], basis[i]
                continue
            _pivot(rows, rhs, basis, i, pivot_col)
        i += 1


def lp_feasible(a_eq: Sequence[Sequence[Fraction]], b_eq: Sequence[Fraction],
                a_ub: Sequence[Sequence[Fraction]] = (),
                b_ub: Sequence[Fraction] = ()) -> bool:
    """Does ``a_eq x = b_eq``, ``a_ub x <= b_ub`` admit some ``x >= 0``?"""
    n = len(a_eq[0]) if a_eq else (len(a_ub[0]) if a_ub else 0)
    try:
        simplex_min([ZERO] * n, a_eq, b_eq, a_ub, b_ub)
        return True
    except Infeasible:
        return False


def solve_transport(cost: Sequence[Sequence[Fraction]],
                    supplies: Sequence[Fraction],
                    demands: Sequence[Fraction],
                    ) -> tuple[Fraction, list[list[Fraction]]]:
    """Minimum-cost transport between two rational mass vectors.

    ``cost[i][j]`` is the unit cost of moving mass from supply point ``i``
    to demand point ``j``; supplies and demands must have equal totals.
    Returns the optimal value together with an optimal plan matrix.
    """
    m, n = len(supplies), len(demands)
    assert sum(supplies, ZERO) == sum(demands, ZERO)
    nvars = m * n
    a_eq: list[list[Fraction]] = []
    b_eq: list[Fraction] = []
    for i in range(m):
        row = [ZERO] * nvars
        for j in range(n):
            row[i * n + j] = ONE
        a_eq.append(row)
        b_eq.append(Fraction(supplies[i]))
    for j in range(n):
        row = [ZERO] * nvars
        for i in range(m):
            row[i * n + j] = ONE
        a_eq.append(row)
        b_eq.append(Fraction(demands[j]))
    flat = [Fraction(cost[i][j]) for i in range(m) for j in range(n)]
    value, x = simplex_min(flat, a_eq, b_eq)
    plan = [[x[i * n + j] for j in range(n)] for i in range(m)]
    return value, plan

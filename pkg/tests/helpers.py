"""Test-only reference implementations and random generators.

The transport oracle here is deliberately naive: it enumerates vertices of
the transportation polytope via spanning trees of the complete bipartite
graph and evaluates the cost at each feasible vertex.  An optimal basic
feasible solution always exists for a bounded feasible LP, so the minimum
over feasible tree solutions equals the true optimum.  Exponential, but
exact, and entirely independent of the simplex code under test.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from pgsos.multiplicity import (
    INF,
    Multiplicity,
    ProbMultiplicity,
    mult,
)
from pgsos.terms import state_var


# ---------------------------------------------------------------------------
# Brute-force minimum-cost transport
# ---------------------------------------------------------------------------

def _tree_flow(edges, supply, demand):
    """Unique flow on a spanning tree, or None if any edge goes negative.

    Nodes are ('L', i) / ('R', j); balances start at +supply / +demand and
    leaf-stripping determines every edge value.
    """
    balance = {("L", i): s for i, s in enumerate(supply)}
    balance.update({("R", j): d for j, d in enumerate(demand)})
    adj = {v: set() for v in balance}
    for (i, j) in edges:
        adj[("L", i)].add(("R", j))
        adj[("R", j)].add(("L", i))
    flow = {}
    pending = set(balance)
    while len(pending) > 1:
        leaf = next(v for v in pending if len(adj[v]) == 1)
        (other,) = adj[leaf]
        value = balance[leaf]
        if value < 0:
            return None
        i = leaf[1] if leaf[0] == "L" else other[1]
        j = other[1] if leaf[0] == "L" else leaf[1]
        flow[(i, j)] = value
        balance[other] -= value
        adj[other].discard(leaf)
        pending.discard(leaf)
    last = next(iter(pending))
    if balance[last] != 0:
        return None
    return flow


def _spanning_trees(m: int, n: int):
    """All spanning trees of K_{m,n} as edge sets, by filtering subsets."""
    edges = [(i, j) for i in range(m) for j in range(n)]
    size = m + n - 1
    for subset in itertools.combinations(edges, size):
        # acyclic + spanning == connected with |V|-1 edges touching all nodes
        parent = {("L", i): ("L", i) for i in range(m)}
        parent.update({("R", j): ("R", j) for j in range(n)})

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        ok = True
        for (i, j) in subset:
            a, b = find(("L", i)), find(("R", j))
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok and len({find(v) for v in parent}) == 1:
            yield subset


def transport_bruteforce(cost, supply, demand) -> Fraction:
    """Exact minimum transport cost by enumerating polytope vertices."""
    m, n = len(supply), len(demand)
    assert sum(supply) == sum(demand)
    best = None
    for tree in _spanning_trees(m, n):
        flow = _tree_flow(tree, list(supply), list(demand))
        if flow is None:
            continue
        total = sum(q * cost[i][j] for (i, j), q in flow.items())
        if best is None or total < best:
            best = total
    assert best is not None, "every balanced instance has a feasible tree"
    return best


# ---------------------------------------------------------------------------
# Random domain elements
# ---------------------------------------------------------------------------

VARS = tuple(state_var(n) for n in ("x", "y", "z"))


def random_fraction(rng: random.Random, den: int = 12) -> Fraction:
    d = rng.randint(1, den)
    return Fraction(rng.randint(0, d), d)


def random_multiplicity(rng: random.Random, inf_ok: bool = True) -> Multiplicity:
    entries = {}
    for x in VARS:
        roll = rng.random()
        if roll < 0.45:
            continue
        if inf_ok and roll > 0.92:
            entries[x] = INF
        else:
            entries[x] = rng.randint(1, 3)
    return mult(entries)


def random_prob_multiplicity(rng: random.Random, *, inf_ok: bool = True,
                             max_support: int = 3) -> ProbMultiplicity:
    k = rng.randint(1, max_support)
    supp = []
    while len(supp) < k:
        m = random_multiplicity(rng, inf_ok)
        if m not in supp:
            supp.append(m)
    cuts = sorted(rng.randint(1, 24) for _ in range(len(supp) - 1))
    weights = []
    prev = 0
    for c in cuts:
        weights.append(Fraction(c - prev, 24))
        prev = c
    weights.append(Fraction(24 - prev, 24))
    pairs = [(m, q) for m, q in zip(supp, weights) if q > 0]
    return ProbMultiplicity.from_pairs(pairs)


def shrink_multiplicity(rng: random.Random, m: Multiplicity) -> Multiplicity:
    """A pointwise smaller-or-equal multiplicity (possibly equal)."""
    entries = {}
    for x, n in m.entries:
        if n is INF:
            entries[x] = INF if rng.random() < 0.6 else rng.randint(0, 4)
        else:
            entries[x] = rng.randint(0, int(n))
        if entries[x] == 0:
            del entries[x]
    return mult(entries)


def degrade(rng: random.Random, p2: ProbMultiplicity) -> ProbMultiplicity:
    """A probabilistic multiplicity below ``p2`` by construction.

    Each column mass of ``p2`` is split over pointwise-smaller
    multiplicities, which witnesses the ordering with the obvious coupling.
    """
    pairs = []
    for m2, q2 in p2:
        parts = rng.randint(1, 2)
        if parts == 1 or q2.numerator == 1:
            pairs.append((shrink_multiplicity(rng, m2), q2))
        else:
            half = q2 / 2
            pairs.append((shrink_multiplicity(rng, m2), half))
            pairs.append((shrink_multiplicity(rng, m2), q2 - half))
    merged: dict[Multiplicity, Fraction] = {}
    for m, q in pairs:
        merged[m] = merged.get(m, Fraction(0)) + q
    return ProbMultiplicity.from_pairs(merged.items())


def degraded_pair(rng: random.Random) -> tuple[ProbMultiplicity, ProbMultiplicity]:
    """A pair ``(p1, p2)`` true by construction for the probabilistic order."""
    p2 = random_prob_multiplicity(rng)
    return degrade(rng, p2), p2


def random_distance(rng: random.Random, den: int = 10):
    """A process distance on the shared variable pool, values in [0, 1)."""
    from pgsos.multiplicity import process_distance
    return process_distance({x: Fraction(rng.randint(0, den - 1), den)
                             for x in VARS})

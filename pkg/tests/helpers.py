"""Shared test oracles and random generators.

The oracles recompute model quantities by the most direct definition
available (full permutation enumeration, explicit subset sums, nested
coalition loops) so the package's optimized paths are checked against
independent arithmetic rather than against themselves.
"""

import itertools
import math

from ieoq import AgentSet, Interval, IntervalInventorySituation, drop_agent


def shapley_by_permutations(n, cost):
    """Average marginal vectors over all n! agent orders.

    `cost` maps a coalition bitmask to a float. This is the definition of
    the Shapley value, kept deliberately naive.
    """
    totals = [0.0] * n
    orders = 0
    for perm in itertools.permutations(range(n)):
        mask = 0
        for agent in perm:
            grown = mask | (1 << agent)
            totals[agent] += cost(grown) - cost(mask)
            mask = grown
        orders += 1
    return [t / orders for t in totals]


def shapley_from_unanimity(n, coeffs):
    """Second independent path: members of T split its coefficient evenly."""
    shares = [0.0] * n
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        for i in members:
            shares[i] += coeffs[mask] / len(members)
    return shares


def subset_sum_reconstruction(coeffs):
    """values[S] as the direct sum of coefficients over all subsets of S."""
    size = len(coeffs)
    values = []
    for mask in range(size):
        total = 0.0
        sub = mask
        while True:
            total += coeffs[sub]
            if sub == 0:
                break
            sub = (sub - 1) & mask
        values.append(total)
    return values


def concave_by_definition(values, n, tol=1e-9):
    """Direct nested-coalition concavity check: for all S subset of T and
    i outside T, joining S must cost at least as much as joining T."""
    for i in range(n):
        for big in range(1 << n):
            if big >> i & 1:
                continue
            small = big
            while True:
                lhs = values[small | 1 << i] - values[small]
                rhs = values[big | 1 << i] - values[big]
                if lhs < rhs - max(tol, tol * max(abs(lhs), abs(rhs))):
                    return False
                if small == 0:
                    break
                small = (small - 1) & big
    return True


def inventory_cost_fn(ordering_cost, squared_frequencies):
    """Joint-order coalition cost as a plain closure over a bitmask."""

    def cost(mask):
        total = 0.0
        for i, sq in enumerate(squared_frequencies):
            if mask >> i & 1:
                total += sq
        return 2.0 * ordering_cost * math.sqrt(total)

    return cost


def subsituations_valid(situation):
    return all(drop_agent(situation, j).shapley_valid for j in range(situation.n))


def random_situation(rng, n=None, require=None, zero_agent=False):
    """Random interval inventory situation.

    Frequency bounds follow lo ~ U[0.1, 50], hi = lo * U[1, 3]. With
    `zero_agent` one agent is made inactive. `require` filters by
    rejection: "soc" keeps the bound-ratio condition, "monotonic" keeps
    size monotonicity, "monotonic-subs" additionally requires every
    one-agent restriction to stay monotonic.
    """
    while True:
        size = n if n is not None else int(rng.integers(2, 7))
        lo = rng.uniform(0.1, 50.0, size)
        hi = lo * rng.uniform(1.0, 3.0, size)
        if zero_agent:
            k = int(rng.integers(0, size))
            lo[k] = hi[k] = 0.0
        freqs = tuple(Interval(float(l), float(h)) for l, h in zip(lo, hi))
        situation = IntervalInventorySituation(
            AgentSet.numbered(size), float(rng.uniform(0.5, 300.0)), freqs
        )
        if require is None:
            return situation
        if require == "soc" and situation.soc_valid:
            return situation
        if require == "monotonic" and situation.shapley_valid:
            return situation
        if (
            require == "monotonic-subs"
            and situation.shapley_valid
            and subsituations_valid(situation)
        ):
            return situation


def random_pair(rng, n, require=None):
    """Two situations sharing agents and ordering cost, plus their demand
    pooling staying inside `require` (same filter values as above)."""
    from ieoq import combine_frequencies

    while True:
        first = random_situation(rng, n=n, require=require)
        lo = rng.uniform(0.1, 50.0, n)
        hi = lo * rng.uniform(1.0, 3.0, n)
        second = IntervalInventorySituation(
            first.agents,
            first.ordering_cost,
            tuple(Interval(float(l), float(h)) for l, h in zip(lo, hi)),
        )
        if require == "soc" and not second.soc_valid:
            continue
        if require in ("monotonic", "monotonic-subs") and not second.shapley_valid:
            continue
        combined = combine_frequencies(first, second)
        if require == "soc" and not combined.soc_valid:
            continue
        if require in ("monotonic", "monotonic-subs") and not combined.shapley_valid:
            continue
        return first, second

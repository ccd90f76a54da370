"""Transferable-utility cost games on bitmask-indexed coalition tables.

A coalition over agents 0..n-1 is an int in [0, 2**n) whose bit i marks
membership of agent i; 0 is the empty coalition and (1 << n) - 1 the grand
coalition. Tabulating every coalition keeps concavity, core and Shapley
computations exhaustive and cheap at the group sizes this package targets;
the caps below keep the tables in memory.

CostGame instances are immutable after construction and all operations are
pure, so games can be shared freely across threads.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

__all__ = [
    "MAX_SWEEP_AGENTS",
    "MAX_TABLE_AGENTS",
    "AgentSet",
    "ConcavityResult",
    "CostGame",
    "TooManyAgents",
    "coalition_members",
    "coalition_of",
    "coalition_sums",
    "core_contains",
    "describe_coalition",
    "is_concave",
    "rescale_to_total",
    "shapley_exact",
    "shapley_sampled",
    "unanimity_coefficients",
]

MAX_TABLE_AGENTS = 24  # 2**n value table must fit in memory
MAX_SWEEP_AGENTS = 20  # exhaustive per-coalition sweeps stay interactive

_REL_TOL = 1e-9
_ABS_TOL = 1e-9


class TooManyAgents(ValueError):
    """An exhaustive operation was requested beyond its agent-count cap."""


def _value_tol(*values: float) -> float:
    """Comparison tolerance scaled to the magnitudes being compared."""
    return max(_ABS_TOL, _REL_TOL * max(abs(v) for v in values))


@dataclass(frozen=True)
class AgentSet:
    """Ordered, uniquely labelled agents; position in `labels` is the index."""

    labels: tuple

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if not 1 <= len(labels) <= MAX_TABLE_AGENTS:
            raise ValueError(
                f"agent count must be between 1 and {MAX_TABLE_AGENTS}, got {len(labels)}"
            )
        if len(set(labels)) != len(labels):
            raise ValueError("agent labels must be unique")

    @classmethod
    def numbered(cls, n: int) -> "AgentSet":
        """Agents labelled \"1\".. \"n\"."""
        return cls(tuple(str(i + 1) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def grand_coalition(self) -> int:
        return (1 << self.n) - 1


def coalition_of(members: Iterable[int]) -> int:
    """Bitmask of the given agent indices."""
    mask = 0
    for i in members:
        mask |= 1 << i
    return mask


def coalition_members(mask: int) -> tuple:
    """Agent indices in a coalition, ascending."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def describe_coalition(mask: int, agents: AgentSet) -> str:
    """Human-readable member list, e.g. "{Madrid, Sevilla}"."""
    if mask == 0:
        return "{}"
    return "{" + ", ".join(agents.labels[i] for i in coalition_members(mask)) + "}"


@dataclass(frozen=True, eq=False)
class CostGame:
    """Cost game tabulated over all coalitions.

    `values[mask]` is the coalition's cost; the empty coalition costs 0.
    The table is copied on construction and frozen read-only.
    """

    agents: AgentSet
    values: np.ndarray

    def __post_init__(self) -> None:
        table = np.array(self.values, dtype=float)
        expected = 1 << self.agents.n
        if table.shape != (expected,):
            raise ValueError(
                f"value table must have length {expected}, got {table.shape}"
            )
        if abs(table[0]) > _ABS_TOL:
            raise ValueError(f"empty coalition must cost 0, got {table[0]}")
        table[0] = 0.0
        table.setflags(write=False)
        object.__setattr__(self, "values", table)

    @classmethod
    def from_function(cls, agents: AgentSet, cost: Callable[[int], float]) -> "CostGame":
        """Tabulate `cost(mask)` over every coalition."""
        return cls(agents, np.array([cost(mask) for mask in range(1 << agents.n)], dtype=float))

    def value(self, coalition: int) -> float:
        return float(self.values[coalition])

    @property
    def grand_value(self) -> float:
        return float(self.values[-1])


def unanimity_coefficients(game: CostGame) -> np.ndarray:
    """Coordinates of the game in the unanimity-game basis, indexed by coalition.

    Inverse of summation over subsets: for every coalition S,
    game.values[S] equals the sum of coefficients over all T subset of S.
    Index 0 (empty coalition) is always 0.
    """
    coeffs = game.values.astype(float)  # fresh writable copy
    idx = np.arange(coeffs.size)
    for i in range(game.agents.n):
        has = ((idx >> i) & 1).astype(bool)
        coeffs[has] -= coeffs[idx[has] ^ (1 << i)]
    return coeffs


def shapley_exact(game: CostGame) -> np.ndarray:
    """Shapley value via the subset-weight sum, O(n * 2**n)."""
    n = game.agents.n
    if n > MAX_TABLE_AGENTS:
        raise TooManyAgents(f"exact Shapley capped at {MAX_TABLE_AGENTS} agents, got {n}")
    values = game.values
    masks = np.arange(values.size, dtype=np.int64)
    sizes = np.bitwise_count(masks).astype(np.int64)
    fact = [math.factorial(k) for k in range(n + 1)]
    weight_by_size = np.array(
        [fact[s] * fact[n - s - 1] / fact[n] for s in range(n)], dtype=float
    )
    shares = np.empty(n, dtype=float)
    for i in range(n):
        without = masks[(masks >> i) & 1 == 0]
        marginal = values[without | (1 << i)] - values[without]
        shares[i] = weight_by_size[sizes[without]] @ marginal
    return shares


def rescale_to_total(shares: np.ndarray, target: float) -> np.ndarray:
    """Adjust shares to sum exactly to `target`.

    Multiplicative when both the target and the raw total are nonzero, so
    relative proportions survive; otherwise a uniform additive shift.
    """
    shares = np.asarray(shares, dtype=float)
    total = float(shares.sum())
    if abs(target) > _ABS_TOL and abs(total) > _ABS_TOL:
        return shares * (target / total)
    return shares + (target - total) / shares.size


def _shapley_all_permutations(game: CostGame) -> np.ndarray:
    """Average marginal vectors over every agent order, in lexicographic order."""
    n = game.agents.n
    values = game.values
    totals = [0.0] * n
    for perm in itertools.permutations(range(n)):
        mask = 0
        for agent in perm:
            grown = mask | (1 << agent)
            totals[agent] += values[grown] - values[mask]
            mask = grown
    estimate = np.array(totals, dtype=float) / math.factorial(n)
    return rescale_to_total(estimate, game.grand_value)


def shapley_sampled(game: CostGame, samples: int, seed: int, block_size: int = 8192) -> np.ndarray:
    """Permutation-sampling Shapley estimate, rescaled to exact efficiency.

    Deterministic for fixed (samples, seed): permutations come from one
    seeded generator and partial sums reduce in fixed block order, so equal
    inputs give bitwise-equal outputs. When `samples` covers all n! orders
    the estimator switches to exhaustive enumeration, which is exact and
    cheaper.
    """
    n = game.agents.n
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if math.factorial(n) <= samples:
        return _shapley_all_permutations(game)
    rng = np.random.default_rng(seed)
    template = np.arange(n, dtype=np.int64)
    totals = np.zeros(n, dtype=float)
    remaining = samples
    while remaining:
        block = min(block_size, remaining)
        perms = rng.permuted(np.tile(template, (block, 1)), axis=1)
        bits = np.int64(1) << perms
        grown = np.bitwise_or.accumulate(bits, axis=1)
        before = grown ^ bits
        marginal = game.values[grown] - game.values[before]
        totals += np.bincount(perms.ravel(), weights=marginal.ravel(), minlength=n)
        remaining -= block
    return rescale_to_total(totals / samples, game.grand_value)


class ConcavityResult(NamedTuple):
    holds: bool
    witness: Optional[tuple]  # (S, T, i): adding i to T = S + {j} beats adding i to S


def is_concave(game: CostGame) -> ConcavityResult:
    """Whether marginal costs shrink as coalitions grow.

    Uses the pairwise form c(S+i) - c(S) >= c(S+i+j) - c(S+j) over all S
    and distinct i, j outside S, which is equivalent to the general
    nested-coalition definition. On failure the witness is the first
    violating (S, T, i) ordered by agent, then S, then T.
    """
    n = game.agents.n
    if n > MAX_SWEEP_AGENTS:
        raise TooManyAgents(f"concavity sweep capped at {MAX_SWEEP_AGENTS} agents, got {n}")
    values = game.values
    masks = np.arange(values.size, dtype=np.int64)
    best: Optional[tuple] = None
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            free = masks[((masks >> i) & 1 == 0) & ((masks >> j) & 1 == 0)]
            lhs = values[free | (1 << i)] - values[free]
            rhs = values[free | (1 << i) | (1 << j)] - values[free | (1 << j)]
            tol = np.maximum(_ABS_TOL, _REL_TOL * np.maximum(np.abs(lhs), np.abs(rhs)))
            bad = np.nonzero(lhs < rhs - tol)[0]
            if bad.size:
                small = int(free[bad[0]])
                candidate = (i, small, small | (1 << j))
                if best is None or candidate < best:
                    best = candidate
    if best is None:
        return ConcavityResult(True, None)
    i, small, grown = best
    return ConcavityResult(False, (small, grown, i))


def coalition_sums(shares: Sequence[float]) -> np.ndarray:
    """Sum of per-agent shares over every coalition, indexed by bitmask."""
    sums = np.zeros(1, dtype=float)
    for share in shares:
        sums = np.concatenate([sums, sums + float(share)])
    return sums


def core_contains(game: CostGame, shares: Sequence[float]) -> bool:
    """Core membership: efficient, and no coalition pays above its own cost."""
    n = game.agents.n
    if n > MAX_SWEEP_AGENTS:
        raise TooManyAgents(f"core sweep capped at {MAX_SWEEP_AGENTS} agents, got {n}")
    vector = np.asarray(shares, dtype=float)
    if vector.shape != (n,):
        raise ValueError(f"share vector must have length {n}, got {vector.shape}")
    total = float(vector.sum())
    if abs(total - game.grand_value) > _value_tol(total, game.grand_value):
        return False
    sums = coalition_sums(vector)
    tol = np.maximum(_ABS_TOL, _REL_TOL * np.abs(game.values))
    return bool(np.all(sums <= game.values + tol))

"""Economic order quantity costs and interval inventory situations.

The deterministic path covers one agent facing a known demand rate: the
classic square-root batch size and its optimal average cost. The interval
path models demand known only within bounds; each agent is then summarised
by an interval of optimal order frequencies, and a group placing joint
orders induces an interval-valued cost game over coalitions.

Situations and games are immutable; every function here is pure.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .games import (
    MAX_SWEEP_AGENTS,
    AgentSet,
    CostGame,
    TooManyAgents,
    coalition_members,
)
from .intervals import GUARD_SLACK, Interval

__all__ = [
    "AllZeroFrequencies",
    "DeterministicAgent",
    "IntervalAgent",
    "IntervalGame",
    "IntervalInventorySituation",
    "SizeMonotonicReport",
    "SocConditionReport",
    "aggregate_frequency",
    "build_situation_from_demand",
    "drop_agent",
    "eoq_frequency",
    "eoq_optimal_cost",
    "eoq_order_size",
    "interval_game_value",
    "materialize_game",
    "validate_size_monotonic",
    "validate_soc_condition",
]


class AllZeroFrequencies(ValueError):
    """Every order frequency is [0, 0]; ratio-based validation is undefined."""


def _check_ordering_cost(ordering_cost: float) -> float:
    ordering_cost = float(ordering_cost)
    if not ordering_cost > 0:
        raise ValueError(f"ordering cost must be positive, got {ordering_cost}")
    return ordering_cost


@dataclass(frozen=True)
class DeterministicAgent:
    """Known demand rate (units/period) and unit holding cost (per unit/period)."""

    demand: float
    holding_cost: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "demand", float(self.demand))
        object.__setattr__(self, "holding_cost", float(self.holding_cost))
        if self.demand < 0:
            raise ValueError(f"demand must be nonnegative, got {self.demand}")
        if not self.holding_cost > 0:
            raise ValueError(f"holding cost must be positive, got {self.holding_cost}")


@dataclass(frozen=True)
class IntervalAgent:
    """Demand known only within an interval; holding cost deterministic."""

    demand: Interval
    holding_cost: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "holding_cost", float(self.holding_cost))
        if self.demand.lo < 0:
            raise ValueError(f"demand must be nonnegative, got {self.demand}")
        if not self.holding_cost > 0:
            raise ValueError(f"holding cost must be positive, got {self.holding_cost}")


def eoq_order_size(agent: DeterministicAgent, ordering_cost: float) -> float:
    """Cost-minimising batch size sqrt(2 a d / h); 0 when demand is 0."""
    a = _check_ordering_cost(ordering_cost)
    return math.sqrt(2.0 * a * agent.demand / agent.holding_cost)

def eoq_frequency(agent: DeterministicAgent, ordering_cost: float) -> float:
    """Orders per period at the optimal batch size: sqrt(d h / (2 a))."""
    a = _check_ordering_cost(ordering_cost)
    return math.sqrt(agent.demand * agent.holding_cost / (2.0 * a))


def eoq_optimal_cost(agent: DeterministicAgent, ordering_cost: float) -> float:
    """Minimal average cost per period; equals 2 a times the order frequency.

    Ordering and holding components are equal at the optimum, which is why
    the whole cost collapses to a multiple of the order frequency. That
    collapse is what makes frequencies sufficient statistics for the
    cooperative model below.
    """
    return 2.0 * _check_ordering_cost(ordering_cost) * eoq_frequency(agent, ordering_cost)


@dataclass(frozen=True, eq=False)
class IntervalInventorySituation:
    """A group of agents sharing a fixed ordering cost, one frequency interval each.

    `frequencies[i]` bounds agent i's optimal stand-alone order frequency.
    Two cached validity flags gate the allocation rules: `soc_valid` for
    the squared-frequency proportional rule (every share's interval
    division defined) and `shapley_valid` for the two-border Shapley rule
    (interval widths of the induced game never shrink as coalitions grow).
    """

    agents: AgentSet
    ordering_cost: float
    frequencies: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordering_cost", _check_ordering_cost(self.ordering_cost))
        freqs = tuple(self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if len(freqs) != self.agents.n:
            raise ValueError(
                f"need one frequency per agent: {self.agents.n} agents, {len(freqs)} frequencies"
            )
        for label, freq in zip(self.agents.labels, freqs):
            if not isinstance(freq, Interval):
                raise TypeError(f"agent {label}: frequency must be an Interval")
            if freq.lo < 0:
                raise ValueError(f"agent {label}: frequency must be nonnegative, got {freq}")

    @property
    def n(self) -> int:
        return self.agents.n

    @cached_property
    def soc_valid(self) -> bool:
        # An all-inactive situation has nothing to allocate, hence no
        # condition to fail; the ratio test itself is undefined there.
        if all(f.hi == 0 for f in self.frequencies):
            return True
        return validate_soc_condition(self).holds

    @cached_property
    def shapley_valid(self) -> bool:
        return validate_size_monotonic(self).holds


def build_situation_from_demand(
    agents: Sequence[IntervalAgent],
    ordering_cost: float,
    labels: Optional[Sequence[str]] = None,
) -> IntervalInventorySituation:
    """Situation with frequency intervals derived from interval demand.

    Both frequency bounds come from the deterministic formula applied at
    the matching demand bound, which is exact because frequency is
    monotone in demand.
    """
    a = _check_ordering_cost(ordering_cost)
    freqs = []
    for agent in agents:
        factor = agent.holding_cost / (2.0 * a)
        freqs.append(
            Interval(
                math.sqrt(agent.demand.lo * factor),
                math.sqrt(agent.demand.hi * factor),
            )
        )
    agent_set = AgentSet.numbered(len(agents)) if labels is None else AgentSet(tuple(labels))
    return IntervalInventorySituation(agent_set, a, tuple(freqs))


def aggregate_frequency(situation: IntervalInventorySituation, coalition: Optional[int] = None) -> Interval:
    """Joint order frequency of a coalition: root of summed squared frequencies.

    Defaults to the grand coalition. This is the quantity whose multiple
    2a gives the coalition's joint optimal cost.
    """
    if coalition is None:
        coalition = situation.agents.grand_coalition
    lo_sq = 0.0
    hi_sq = 0.0
    for i in coalition_members(coalition):
        f = situation.frequencies[i]
        lo_sq += f.lo * f.lo
        hi_sq += f.hi * f.hi
    return Interval(math.sqrt(lo_sq), math.sqrt(hi_sq))


def interval_game_value(situation: IntervalInventorySituation, coalition: int) -> Interval:
    """Joint optimal cost interval 2a * sqrt(sum of squared frequencies)."""
    joint = aggregate_frequency(situation, coalition)
    twice_a = 2.0 * situation.ordering_cost
    return Interval(twice_a * joint.lo, twice_a * joint.hi)


class SocConditionReport(NamedTuple):
    holds: bool
    agent_ratios: tuple  # lo^2 / hi^2 per agent; 0.0 for inactive agents
    aggregate_ratio: float  # aggregate frequency lo / hi
    margin: float  # aggregate_ratio - max(agent_ratios)


def validate_soc_condition(situation: IntervalInventorySituation) -> SocConditionReport:
    """Check that every agent's squared bound ratio stays below the aggregate ratio.

    The inequality max_i lo_i^2/hi_i^2 <= aggregate.lo/aggregate.hi is
    precisely what keeps each squared-frequency share's interval division
    defined, so `holds` is equivalent to the proportional rule being
    applicable. Evaluated with GUARD_SLACK so analytically tight cases
    (e.g. all agents sharing one bound ratio) pass.
    """
    freqs = situation.frequencies
    if all(f.hi == 0 for f in freqs):
        raise AllZeroFrequencies("all order frequencies are [0, 0]")
    ratios = tuple(
        (f.lo * f.lo) / (f.hi * f.hi) if f.hi > 0 else 0.0 for f in freqs
    )
    joint = aggregate_frequency(situation)
    aggregate_ratio = joint.lo / joint.hi
    margin = aggregate_ratio - max(ratios)
    return SocConditionReport(margin >= -GUARD_SLACK, ratios, aggregate_ratio, margin)


class SizeMonotonicReport(NamedTuple):
    holds: bool
    witness: Optional[tuple]  # (S, i): width shrinks when agent i joins S


def _subset_square_sums(values: Sequence[float]) -> np.ndarray:
    """Sum of squared values over every coalition, indexed by bitmask."""
    sums = np.zeros(1, dtype=float)
    for v in values:
        sums = np.concatenate([sums, sums + float(v) * float(v)])
    return sums


def validate_size_monotonic(situation: IntervalInventorySituation) -> SizeMonotonicReport:
    """Check interval widths of the induced game never shrink as coalitions grow.

    Single-agent extensions suffice: any nested pair differs by a chain of
    them. On failure the witness is the first violating (S, i) ordered by
    coalition, then agent.
    """
    n = situation.n
    if n > MAX_SWEEP_AGENTS:
        raise TooManyAgents(f"monotonicity sweep capped at {MAX_SWEEP_AGENTS} agents, got {n}")
    lo_sums = _subset_square_sums([f.lo for f in situation.frequencies])
    hi_sums = _subset_square_sums([f.hi for f in situation.frequencies])
    twice_a = 2.0 * situation.ordering_cost
    widths = twice_a * (np.sqrt(hi_sums) - np.sqrt(lo_sums))
    masks = np.arange(widths.size, dtype=np.int64)
    best: Optional[tuple] = None
    for i in range(n):
        without = masks[(masks >> i) & 1 == 0]
        shrank = np.nonzero(widths[without | (1 << i)] < widths[without] - GUARD_SLACK)[0]
        if shrank.size:
            candidate = (int(without[shrank[0]]), i)
            if best is None or candidate < best:
                best = candidate
    return SizeMonotonicReport(best is None, best)


@dataclass(frozen=True, eq=False)
class IntervalGame:
    """Interval-valued coalition costs held as two aligned border games."""

    agents: AgentSet
    lower: CostGame
    upper: CostGame

    def __post_init__(self) -> None:
        if self.lower.agents.n != self.agents.n or self.upper.agents.n != self.agents.n:
            raise ValueError("border games must share the agent set")
        if not np.all(self.lower.values <= self.upper.values + GUARD_SLACK):
            raise ValueError("lower border exceeds upper border")

    def value(self, coalition: int) -> Interval:
        lo = self.lower.value(coalition)
        hi = self.upper.value(coalition)
        if hi < lo:  # borders equal within GUARD_SLACK
            hi = lo
        return Interval(lo, hi)

    def length_game(self) -> CostGame:
        """Game of interval widths; monotone exactly for valid Shapley input."""
        return CostGame(self.agents, self.upper.values - self.lower.values)


def materialize_game(situation: IntervalInventorySituation) -> IntervalGame:
    """Tabulate both border games of the induced interval cost game."""
    n = situation.n
    if n > MAX_SWEEP_AGENTS:
        raise TooManyAgents(f"game table capped at {MAX_SWEEP_AGENTS} agents, got {n}")
    twice_a = 2.0 * situation.ordering_cost
    lower = twice_a * np.sqrt(_subset_square_sums([f.lo for f in situation.frequencies]))
    upper = twice_a * np.sqrt(_subset_square_sums([f.hi for f in situation.frequencies]))
    return IntervalGame(
        situation.agents,
        CostGame(situation.agents, lower),
        CostGame(situation.agents, upper),
    )


def drop_agent(situation: IntervalInventorySituation, agent: int) -> IntervalInventorySituation:
    """Sub-situation without one agent; ordering cost and the rest unchanged."""
    n = situation.n
    if not 0 <= agent < n:
        raise IndexError(f"agent index {agent} out of range for {n} agents")
    if n < 2:
        raise ValueError("cannot drop the only agent")
    labels = tuple(l for k, l in enumerate(situation.agents.labels) if k != agent)
    freqs = tuple(f for k, f in enumerate(situation.frequencies) if k != agent)
    return IntervalInventorySituation(AgentSet(labels), situation.ordering_cost, freqs)

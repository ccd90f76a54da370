"""Interval cost-allocation rules and their axiomatic property checks.

Rules map an interval inventory situation to one interval share per agent:

* `individual_costs`: each agent's stand-alone cost, the no-cooperation
  baseline (not an allocation of the joint cost).
* `interval_soc`: shares proportional to squared order frequencies,
  evaluated in interval arithmetic.
* `interval_shapley`: the Shapley value of each border game, paired up.
* `interval_shapley_sampled`: permutation-sampling variant of the above.
* `proportional_to_frequency`: diagnostic companion that splits the joint
  cost proportionally to the frequency bounds themselves.

The property checks return structured reports rather than booleans so a
failure carries its witnesses: coalition acceptability (`check_cca`),
inactive-agent exemption (`check_iae`), transfer additivity across
root-sum-square demand combination (`check_tba`), balanced cost under
agent removal (`check_bc`), and interval core membership
(`interval_core_contains`). Two deliberately defective rules,
`fixture_no_tba` and `fixture_no_iae`, each satisfy all but one of the
characterizing properties and exist to show the axioms independent.
"""

import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

from .games import (
    AgentSet,
    coalition_sums,
    describe_coalition,
    shapley_exact,
    shapley_sampled,
)
from .intervals import (
    ZERO,
    Interval,
    OrderViolation,
    ZeroDenominator,
    add,
    div_checked,
    mul_nonneg,
    scale,
    sqrt_interval,
)
from .inventory import (
    AllZeroFrequencies,
    IntervalGame,
    IntervalInventorySituation,
    aggregate_frequency,
    drop_agent,
    interval_game_value,
    materialize_game,
    validate_size_monotonic,
    validate_soc_condition,
)

__all__ = [
    "AllAgentsInactive",
    "CombinedSituationInvalid",
    "IntervalAllocation",
    "NotSizeMonotonic",
    "PropertyReport",
    "SocConditionViolated",
    "SubSituationInvalid",
    "Witness",
    "check_bc",
    "check_cca",
    "check_iae",
    "check_tba",
    "combine_frequencies",
    "fixture_no_iae",
    "fixture_no_iae_witness",
    "fixture_no_tba",
    "fixture_no_tba_witness",
    "individual_costs",
    "interval_core_contains",
    "interval_shapley",
    "interval_shapley_sampled",
    "interval_soc",
    "proportional_to_frequency",
]

_REL_TOL = 1e-9
_ABS_TOL = 1e-9

AllocationRule = Callable[[IntervalInventorySituation], "IntervalAllocation"]


class SocConditionViolated(ValueError):
    """The squared-frequency proportional rule is undefined for this situation."""


class NotSizeMonotonic(ValueError):
    """Interval widths of the induced game shrink somewhere; border pairing invalid."""


class CombinedSituationInvalid(ValueError):
    """The root-sum-square combination violates the rule's own precondition."""


class SubSituationInvalid(ValueError):
    """An agent-removal restriction violates the rule's own precondition."""


class AllAgentsInactive(ValueError):
    """Equal-split fixture has nobody to charge: every frequency is [0, 0]."""


@dataclass(frozen=True)
class IntervalAllocation:
    """One interval share per agent, in agent order."""

    shares: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "shares", tuple(self.shares))

    def __len__(self) -> int:
        return len(self.shares)

    def __iter__(self):
        return iter(self.shares)

    def __getitem__(self, i: int) -> Interval:
        return self.shares[i]

    def total(self) -> Interval:
        """Endpoint-wise sum of all shares."""
        return Interval(
            math.fsum(s.lo for s in self.shares),
            math.fsum(s.hi for s in self.shares),
        )


@dataclass(frozen=True)
class Witness:
    """One recorded violation: the offending coalition index or agent pair
    plus the two compared quantities, in the order the property states them."""

    subject: object
    lhs: object
    rhs: object


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one property check.

    `holds` is true exactly when `witnesses` is empty. `skipped` lists
    (subject, reason) pairs the check could not evaluate, e.g. balanced-cost
    pairs whose sub-situation breaks the rule's precondition; skips do not
    fail the check.
    """

    name: str
    holds: bool
    witnesses: tuple
    tolerance: float
    skipped: tuple = ()

    def __post_init__(self) -> None:
        if self.holds != (len(self.witnesses) == 0):
            raise ValueError("holds flag inconsistent with recorded witnesses")


def _report(name: str, witnesses: Sequence[Witness], tolerance: float, skipped: Sequence = ()) -> PropertyReport:
    witnesses = tuple(witnesses)
    return PropertyReport(name, not witnesses, witnesses, tolerance, tuple(skipped))


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=_REL_TOL, abs_tol=_ABS_TOL)


def _upper_tol(value: float) -> float:
    return max(_ABS_TOL, _REL_TOL * abs(value))


def individual_costs(situation: IntervalInventorySituation) -> IntervalAllocation:
    """Stand-alone optimal cost 2a * frequency per agent.

    Baseline for comparison only: whenever cooperation helps, these sum to
    more than the joint cost, so this is not an allocation of it.
    """
    twice_a = 2.0 * situation.ordering_cost
    return IntervalAllocation(tuple(scale(twice_a, f) for f in situation.frequencies))


def interval_soc(situation: IntervalInventorySituation) -> IntervalAllocation:
    """Shares proportional to squared order frequencies.

    share_j = 2a * f_j^2 / aggregate frequency, evaluated in interval
    arithmetic. Sums to the joint cost on both bounds by construction.
    Requires the bound-ratio condition reported by
    `validate_soc_condition`; that condition is exactly what keeps each
    share's interval division defined.
    """
    report = validate_soc_condition(situation)  # raises AllZeroFrequencies
    if not report.holds:
        raise SocConditionViolated(
            "bound-ratio condition fails: max agent ratio "
            f"{max(report.agent_ratios):.9g} exceeds aggregate ratio {report.aggregate_ratio:.9g}"
        )
    squares = [mul_nonneg(f, f) for f in situation.frequencies]
    denominator = sqrt_interval(reduce(add, squares))
    twice_a = 2.0 * situation.ordering_cost
    shares = []
    for square in squares:
        try:
            shares.append(div_checked(scale(twice_a, square), denominator))
        except (OrderViolation, ZeroDenominator) as exc:
            # Unreachable when the ratio condition holds exactly; kept for
            # borderline float cases so callers see one error type.
            raise SocConditionViolated(str(exc)) from exc
    return IntervalAllocation(tuple(shares))


def proportional_to_frequency(situation: IntervalInventorySituation) -> IntervalAllocation:
    """Joint cost split proportionally to the frequency bounds themselves.

    Lower bounds share the lower joint cost, upper bounds the upper. A
    diagnostic companion to `interval_soc`: the two rules coincide only
    when all agents have equal frequencies, and comparing them shows how
    strongly the squared weighting concentrates cost on large agents.
    """
    joint = interval_game_value(situation, situation.agents.grand_coalition)
    lo_total = math.fsum(f.lo for f in situation.frequencies)
    hi_total = math.fsum(f.hi for f in situation.frequencies)
    shares = []
    for f in situation.frequencies:
        lo = joint.lo * f.lo / lo_total if lo_total > 0 else 0.0
        hi = joint.hi * f.hi / hi_total if hi_total > 0 else 0.0
        shares.append(Interval(lo, max(lo, hi)))
    return IntervalAllocation(tuple(shares))


def _check_size_monotonic(situation: IntervalInventorySituation) -> None:
    mono = validate_size_monotonic(situation)
    if not mono.holds:
        coalition, agent = mono.witness
        raise NotSizeMonotonic(
            "interval widths shrink when agent "
            f"{situation.agents.labels[agent]} joins {describe_coalition(coalition, situation.agents)}"
        )


def interval_shapley(situation: IntervalInventorySituation) -> IntervalAllocation:
    """Shapley value of each border game, paired into interval shares.

    Size monotonicity of the induced game guarantees every agent's lower
    Shapley value stays below the upper one, so the pairing is a valid
    interval allocation; without it the rule refuses to run.
    """
    _check_size_monotonic(situation)
    game = materialize_game(situation)
    lower = shapley_exact(game.lower)
    upper = shapley_exact(game.upper)
    shares = []
    for lo, hi in zip(lower, upper):
        lo = float(lo)
        hi = float(hi)
        shares.append(Interval(lo, hi if hi >= lo else lo))
    return IntervalAllocation(tuple(shares))


def interval_shapley_sampled(
    situation: IntervalInventorySituation, samples: int, seed: int
) -> IntervalAllocation:
    """Permutation-sampling estimate of the interval Shapley rule.

    One seeded permutation stream drives both borders, so each raw share
    keeps lo <= hi by size monotonicity. Each border is then rescaled to
    exact efficiency on its own; the two rescale factors can differ by the
    sampling error, so a share far narrower than that error may come out
    microscopically inverted, and the final pass collapses such a share to
    its midpoint.
    """
    _check_size_monotonic(situation)
    game = materialize_game(situation)
    lower = shapley_sampled(game.lower, samples, seed)
    upper = shapley_sampled(game.upper, samples, seed)
    shares = []
    for lo, hi in zip(lower, upper):
        lo = float(lo)
        hi = float(hi)
        if hi < lo:
            lo = hi = (lo + hi) / 2.0
        shares.append(Interval(lo, hi))
    return IntervalAllocation(tuple(shares))


def _as_shares(allocation) -> tuple:
    if isinstance(allocation, IntervalAllocation):
        return allocation.shares
    return tuple(allocation)


def check_cca(situation: IntervalInventorySituation, allocation) -> PropertyReport:
    """Coalition acceptability: no coalition's summed shares exceed its own cost.

    Checks every nonempty coalition on both bounds. Witness subjects are
    coalition bitmasks in ascending order; lhs is the summed share
    interval, rhs the coalition's stand-alone cost interval.
    """
    shares = _as_shares(allocation)
    n = situation.n
    if len(shares) != n:
        raise ValueError(f"allocation has {len(shares)} shares for {n} agents")
    lo_sums = coalition_sums([s.lo for s in shares])
    hi_sums = coalition_sums([s.hi for s in shares])
    witnesses = []
    for mask in range(1, 1 << n):
        cost = interval_game_value(situation, mask)
        if (
            lo_sums[mask] > cost.lo + _upper_tol(cost.lo)
            or hi_sums[mask] > cost.hi + _upper_tol(cost.hi)
        ):
            witnesses.append(
                Witness(mask, Interval(lo_sums[mask], hi_sums[mask]), cost)
            )
    return _report("CCA", witnesses, _REL_TOL)


def check_iae(rule: AllocationRule, situation: IntervalInventorySituation) -> PropertyReport:
    """Inactive-agent exemption: frequency [0, 0] must yield share [0, 0]."""
    allocation = rule(situation)
    witnesses = []
    for i, (freq, share) in enumerate(zip(situation.frequencies, allocation)):
        if freq.lo == 0 and freq.hi == 0:
            if abs(share.lo) > _ABS_TOL or abs(share.hi) > _ABS_TOL:
                witnesses.append(Witness(i, share, ZERO))
    return _report("IAE", witnesses, _ABS_TOL)


def combine_frequencies(
    s1: IntervalInventorySituation, s2: IntervalInventorySituation
) -> IntervalInventorySituation:
    """Agent-wise root-sum-square combination of two frequency profiles.

    This is how frequencies compose when each agent's two demand streams
    are pooled: squared frequencies are proportional to demand, hence add.
    """
    _check_same_setting(s1, s2)
    freqs = tuple(
        sqrt_interval(add(mul_nonneg(f, f), mul_nonneg(g, g)))
        for f, g in zip(s1.frequencies, s2.frequencies)
    )
    return IntervalInventorySituation(s1.agents, s1.ordering_cost, freqs)


def _check_same_setting(s1: IntervalInventorySituation, s2: IntervalInventorySituation) -> None:
    if s1.agents.labels != s2.agents.labels:
        raise ValueError("situations must share the agent set")
    if s1.ordering_cost != s2.ordering_cost:
        raise ValueError("situations must share the ordering cost")


def _all_inactive(situation: IntervalInventorySituation) -> bool:
    return all(f.lo == 0 and f.hi == 0 for f in situation.frequencies)


_RULE_PRECONDITION_ERRORS = (
    SocConditionViolated,
    NotSizeMonotonic,
    AllZeroFrequencies,
    AllAgentsInactive,
)


def _tba_side_terms(rule: AllocationRule, situation: IntervalInventorySituation) -> list:
    # A side with zero aggregate frequency contributes nothing regardless
    # of the rule, which may itself be undefined there.
    if _all_inactive(situation):
        return [ZERO] * situation.n
    weight = aggregate_frequency(situation)
    allocation = rule(situation)
    return [mul_nonneg(weight, share) for share in allocation]


def check_tba(
    rule: AllocationRule,
    s1: IntervalInventorySituation,
    s2: IntervalInventorySituation,
) -> PropertyReport:
    """Transfer additivity: aggregate-weighted shares add across combination.

    For each agent, the combined situation's share weighted by its
    aggregate frequency must equal the sum of the two sides' weighted
    shares, on both bounds. Raises CombinedSituationInvalid when the
    combined situation breaks the rule's own precondition.
    """
    _check_same_setting(s1, s2)
    combined = combine_frequencies(s1, s2)
    try:
        combined_alloc = rule(combined)
    except _RULE_PRECONDITION_ERRORS as exc:
        raise CombinedSituationInvalid(str(exc)) from exc
    combined_weight = aggregate_frequency(combined)
    side1 = _tba_side_terms(rule, s1)
    side2 = _tba_side_terms(rule, s2)
    witnesses = []
    for j in range(s1.n):
        lhs = mul_nonneg(combined_weight, combined_alloc[j])
        rhs = add(side1[j], side2[j])
        if not (_close(lhs.lo, rhs.lo) and _close(lhs.hi, rhs.hi)):
            witnesses.append(Witness(j, lhs, rhs))
    return _report("TBA", witnesses, _REL_TOL)


def _index_after_drop(agent: int, dropped: int) -> int:
    return agent - 1 if agent > dropped else agent


def check_bc(
    rule: AllocationRule,
    situation: IntervalInventorySituation,
    strict: bool = False,
) -> PropertyReport:
    """Balanced cost: removing j changes i's share as removing i changes j's.

    Compared per bound for every unordered agent pair. Restrictions keep
    the ordering cost and the remaining frequencies. A restriction that
    breaks the rule's own precondition makes its pairs unevaluable: they
    are recorded in `skipped` (or raised as SubSituationInvalid when
    strict=True).
    """
    n = situation.n
    if n < 2:
        raise ValueError("balanced-cost check needs at least two agents")
    full = rule(situation)
    sub_results = {}
    for j in range(n):
        try:
            sub_results[j] = rule(drop_agent(situation, j))
        except _RULE_PRECONDITION_ERRORS as exc:
            if strict:
                raise SubSituationInvalid(
                    f"dropping agent {situation.agents.labels[j]}: {exc}"
                ) from exc
            sub_results[j] = exc
    witnesses = []
    skipped = []
    for i in range(n):
        for j in range(i + 1, n):
            without_j = sub_results[j]
            without_i = sub_results[i]
            if isinstance(without_j, Exception) or isinstance(without_i, Exception):
                reason = without_j if isinstance(without_j, Exception) else without_i
                skipped.append(((i, j), str(reason)))
                continue
            i_in_sub = without_j[_index_after_drop(i, j)]
            j_in_sub = without_i[_index_after_drop(j, i)]
            lhs = (full[i].lo - i_in_sub.lo, full[i].hi - i_in_sub.hi)
            rhs = (full[j].lo - j_in_sub.lo, full[j].hi - j_in_sub.hi)
            if not (_close(lhs[0], rhs[0]) and _close(lhs[1], rhs[1])):
                witnesses.append(Witness((i, j), lhs, rhs))
    return _report("BC", witnesses, _REL_TOL, skipped)


def interval_core_contains(game: IntervalGame, allocation) -> PropertyReport:
    """Interval core membership: boundwise efficiency plus boundwise stability.

    Stability witnesses come first in ascending coalition order; a failed
    efficiency equality is appended last with the grand coalition as
    subject.
    """
    shares = _as_shares(allocation)
    n = game.agents.n
    if len(shares) != n:
        raise ValueError(f"allocation has {len(shares)} shares for {n} agents")
    lo_sums = coalition_sums([s.lo for s in shares])
    hi_sums = coalition_sums([s.hi for s in shares])
    witnesses = []
    grand = game.agents.grand_coalition
    for mask in range(1, grand):
        cost = game.value(mask)
        if (
            lo_sums[mask] > cost.lo + _upper_tol(cost.lo)
            or hi_sums[mask] > cost.hi + _upper_tol(cost.hi)
        ):
            witnesses.append(Witness(mask, Interval(lo_sums[mask], hi_sums[mask]), cost))
    joint = game.value(grand)
    total_lo = float(lo_sums[grand])
    total_hi = float(hi_sums[grand])
    if not (_close(total_lo, joint.lo) and _close(total_hi, joint.hi)):
        witnesses.append(Witness(grand, Interval(total_lo, max(total_lo, total_hi)), joint))
    return _report("CORE", witnesses, _REL_TOL)


def fixture_no_tba(situation: IntervalInventorySituation) -> IntervalAllocation:
    """Equal split of the joint cost over active agents; inactive get [0, 0].

    Exempts inactive agents and stays coalition-acceptable in symmetric
    cases, but breaks transfer additivity: test fixture showing that axiom
    is not implied by the others.
    """
    active = [i for i, f in enumerate(situation.frequencies) if f.lo != 0 or f.hi != 0]
    if not active:
        raise AllAgentsInactive("every agent has frequency [0, 0]")
    joint = interval_game_value(situation, situation.agents.grand_coalition)
    per_head = scale(1.0 / len(active), joint)
    active_set = set(active)
    return IntervalAllocation(
        tuple(per_head if i in active_set else ZERO for i in range(situation.n))
    )


def fixture_no_tba_witness() -> tuple:
    """Two-situation instance on which `fixture_no_tba` breaks transfer
    additivity: the sides have disjoint active agents, so the equal split's
    head count changes under combination while the weighted shares do not."""
    agents = AgentSet.numbered(2)
    first = IntervalInventorySituation(agents, 1.0, (Interval(2.0, 2.0), ZERO))
    second = IntervalInventorySituation(agents, 1.0, (ZERO, Interval(1.0, 1.0)))
    return first, second


def fixture_no_iae(situation: IntervalInventorySituation) -> IntervalAllocation:
    """Squared-frequency shares, swapped between the agents when there are
    exactly two; the unmodified rule otherwise.

    Keeps efficiency and transfer additivity (the swap is frequency-
    independent) but charges a two-agent group's inactive member the
    active one's bill: test fixture showing inactive-agent exemption is
    not implied by the others.
    """
    allocation = interval_soc(situation)
    if situation.n == 2:
        return IntervalAllocation((allocation[1], allocation[0]))
    return allocation


def fixture_no_iae_witness() -> IntervalInventorySituation:
    """Two-agent instance on which `fixture_no_iae` charges the inactive agent."""
    return IntervalInventorySituation(
        AgentSet.numbered(2), 1.0, (ZERO, Interval(1.0, 2.0))
    )

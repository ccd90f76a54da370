"""Joint EOQ inventory cost allocation under interval demand uncertainty.

Agents who only know demand within bounds are summarised by intervals of
optimal order frequencies; a group sharing one fixed ordering cost induces
an interval-valued cooperative cost game. This package builds those games,
computes the two allocation rules that stay well defined on them (shares
proportional to squared frequencies, and the border-wise Shapley value),
and checks the axiomatic properties that characterize them.
"""

from .games import (
    AgentSet,
    ConcavityResult,
    CostGame,
    TooManyAgents,
    coalition_members,
    coalition_of,
    core_contains,
    describe_coalition,
    is_concave,
    shapley_exact,
    shapley_sampled,
    unanimity_coefficients,
)
from .intervals import (
    Interval,
    IntervalError,
    NegativeOperand,
    NegativeScalar,
    OrderViolation,
    WidthViolation,
    ZeroDenominator,
    add,
    div_checked,
    length,
    mul_nonneg,
    scale,
    sqrt_interval,
    sub_checked,
    weakly_geq,
    weakly_leq,
)
from .inventory import (
    AllZeroFrequencies,
    DeterministicAgent,
    IntervalAgent,
    IntervalGame,
    IntervalInventorySituation,
    aggregate_frequency,
    build_situation_from_demand,
    drop_agent,
    eoq_frequency,
    eoq_optimal_cost,
    eoq_order_size,
    interval_game_value,
    materialize_game,
    validate_size_monotonic,
    validate_soc_condition,
)
from .rules import (
    AllAgentsInactive,
    CombinedSituationInvalid,
    IntervalAllocation,
    NotSizeMonotonic,
    PropertyReport,
    SocConditionViolated,
    SubSituationInvalid,
    Witness,
    check_bc,
    check_cca,
    check_iae,
    check_tba,
    combine_frequencies,
    fixture_no_iae,
    fixture_no_iae_witness,
    fixture_no_tba,
    fixture_no_tba_witness,
    individual_costs,
    interval_core_contains,
    interval_shapley,
    interval_shapley_sampled,
    interval_soc,
    proportional_to_frequency,
)
from .situationio import (
    BoundsError,
    DuplicateId,
    SchemaError,
    ingest_traffic,
    load_situation,
    load_traffic,
    parse_situation,
    parse_traffic,
    serialize_situation,
)

__version__ = "0.1.0"

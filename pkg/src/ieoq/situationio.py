"""Situation and traffic files: a small versioned TOML schema.

Parsing is strict by default so typos fail loudly; `lenient=True`
downgrades unknown fields to warnings. Serialization is canonical (fixed
field order, shortest round-tripping floats), so parse -> serialize ->
parse is the identity on the parsed representation.

A situation file carries agents either as interval demand plus holding
cost (the preferred, unit-bearing form) or directly as frequency bounds
`m_lo`/`m_hi`. When both are present the supplied frequencies win and a
disagreement beyond 1e-6 relative is warned about. Optional
`m_ref_lo`/`m_ref_hi` carry externally published frequency values for
cross-checking only; they never enter computation.
"""

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .games import AgentSet
from .intervals import Interval
from .inventory import IntervalInventorySituation

__all__ = [
    "BUNDLED_SITUATIONS",
    "SCHEMA_VERSION",
    "AgentSpec",
    "AirportTraffic",
    "BoundsError",
    "DuplicateId",
    "ParseResult",
    "SchemaError",
    "SituationFile",
    "TrafficFile",
    "bundled_path_hint",
    "ingest_traffic",
    "load_situation",
    "load_traffic",
    "parse_situation",
    "parse_traffic",
    "serialize_situation",
    "situation_from_file",
]

SCHEMA_VERSION = 1
BUNDLED_SITUATIONS = ("example1", "example2", "airports2023")

# Supplied frequencies may disagree with demand-derived ones by rounding.
_FREQ_AGREE_RTOL = 1e-6
# Reference frequencies are typically published rounded to 2 decimals.
_REF_AGREE_ATOL = 1e-2


class SchemaError(ValueError):
    """Input file violates the schema; `field_path` names the offending entry."""

    def __init__(self, message: str, field_path: Optional[str] = None):
        self.field_path = field_path
        super().__init__(message if not field_path else f"{field_path}: {message}")


class BoundsError(SchemaError):
    """A lo/hi pair is out of order or out of range."""


class DuplicateId(SchemaError):
    """Agent or airport identifiers must be unique."""


@dataclass(frozen=True)
class AgentSpec:
    """One agent entry as it appears in a situation file."""

    id: int
    name: str
    demand_lo: Optional[float] = None
    demand_hi: Optional[float] = None
    holding_cost: Optional[float] = None
    m_lo: Optional[float] = None
    m_hi: Optional[float] = None
    m_ref_lo: Optional[float] = None
    m_ref_hi: Optional[float] = None

    @property
    def has_demand(self) -> bool:
        return self.demand_lo is not None

    @property
    def has_frequency(self) -> bool:
        return self.m_lo is not None


@dataclass(frozen=True)
class SituationFile:
    """Parsed situation file, order-preserving and value-exact."""

    version: int
    ordering_cost: float
    period_note: str
    agents: tuple


@dataclass(frozen=True)
class ParseResult:
    file: SituationFile
    situation: IntervalInventorySituation
    warnings: tuple


_TOP_FIELDS = {"version", "ordering_cost", "period_note", "agents"}
_AGENT_FIELDS = {
    "id",
    "name",
    "demand_lo",
    "demand_hi",
    "holding_cost",
    "m_lo",
    "m_hi",
    "m_ref_lo",
    "m_ref_hi",
}
_DEMAND_GROUP = ("demand_lo", "demand_hi", "holding_cost")
_FREQUENCY_GROUP = ("m_lo", "m_hi")


def _load_toml(text: Union[str, bytes]) -> dict:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"not valid TOML: {exc}") from exc


def _check_unknown(table: dict, known: set, path: str, lenient: bool, warnings: list) -> None:
    for key in table:
        if key not in known:
            where = f"{path}.{key}" if path else key
            if lenient:
                warnings.append(f"ignoring unknown field {where}")
            else:
                raise SchemaError("unknown field", where)


def _get_number(table: dict, key: str, path: str) -> float:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("must be a number", _join(path, key))
    return float(value)


def _get_int(table: dict, key: str, path: str) -> int:
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError("must be an integer", _join(path, key))
    return value


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _require(table: dict, key: str, path: str) -> None:
    if key not in table:
        raise SchemaError("missing required field", _join(path, key))


def _parse_agent(entry: object, path: str, lenient: bool, warnings: list) -> AgentSpec:
    if not isinstance(entry, dict):
        raise SchemaError("agent entry must be a table", path)
    _check_unknown(entry, _AGENT_FIELDS, path, lenient, warnings)
    _require(entry, "id", path)
    _require(entry, "name", path)
    agent_id = _get_int(entry, "id", path)
    name = entry["name"]
    if not isinstance(name, str) or not name:
        raise SchemaError("must be a nonempty string", _join(path, "name"))

    fields = {}
    for key in ("demand_lo", "demand_hi", "holding_cost", "m_lo", "m_hi", "m_ref_lo", "m_ref_hi"):
        fields[key] = _get_number(entry, key, path) if key in entry else None

    demand_present = [k for k in _DEMAND_GROUP if fields[k] is not None]
    if demand_present and len(demand_present) != len(_DEMAND_GROUP):
        missing = sorted(set(_DEMAND_GROUP) - set(demand_present))
        raise SchemaError(f"incomplete demand group, missing {', '.join(missing)}", path)
    freq_present = [k for k in _FREQUENCY_GROUP if fields[k] is not None]
    if freq_present and len(freq_present) != len(_FREQUENCY_GROUP):
        missing = sorted(set(_FREQUENCY_GROUP) - set(freq_present))
        raise SchemaError(f"incomplete frequency group, missing {', '.join(missing)}", path)
    if not demand_present and not freq_present:
        raise SchemaError(
            "agent needs demand_lo/demand_hi/holding_cost or m_lo/m_hi", path
        )
    ref_present = [k for k in ("m_ref_lo", "m_ref_hi") if fields[k] is not None]
    if ref_present and len(ref_present) != 2:
        raise SchemaError("incomplete reference group, need both m_ref_lo and m_ref_hi", path)

    if demand_present:
        if fields["demand_lo"] < 0:
            raise BoundsError(f"agent {name}: demand_lo must be nonnegative", path)
        if fields["demand_lo"] > fields["demand_hi"]:
            raise BoundsError(
                f"agent {name}: demand_lo {fields['demand_lo']} exceeds demand_hi {fields['demand_hi']}",
                path,
            )
        if not fields["holding_cost"] > 0:
            raise BoundsError(f"agent {name}: holding_cost must be positive", path)
    if freq_present:
        if fields["m_lo"] < 0:
            raise BoundsError(f"agent {name}: m_lo must be nonnegative", path)
        if fields["m_lo"] > fields["m_hi"]:
            raise BoundsError(
                f"agent {name}: m_lo {fields['m_lo']} exceeds m_hi {fields['m_hi']}", path
            )
    if ref_present and fields["m_ref_lo"] > fields["m_ref_hi"]:
        raise BoundsError(
            f"agent {name}: m_ref_lo {fields['m_ref_lo']} exceeds m_ref_hi {fields['m_ref_hi']}",
            path,
        )

    return AgentSpec(id=agent_id, name=name, **fields)


def parse_situation(text: Union[str, bytes], lenient: bool = False) -> ParseResult:
    """Parse a situation file and build the interval inventory situation."""
    data = _load_toml(text)
    warnings: list = []
    _check_unknown(data, _TOP_FIELDS, "", lenient, warnings)
    _require(data, "version", "")
    version = _get_int(data, "version", "")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported version {version}, expected {SCHEMA_VERSION}", "version")
    _require(data, "ordering_cost", "")
    ordering_cost = _get_number(data, "ordering_cost", "")
    if not ordering_cost > 0:
        raise SchemaError("must be positive", "ordering_cost")
    period_note = data.get("period_note", "")
    if not isinstance(period_note, str):
        raise SchemaError("must be a string", "period_note")
    agents_raw = data.get("agents")
    if not isinstance(agents_raw, list) or not agents_raw:
        raise SchemaError("need a nonempty [[agents]] list", "agents")

    specs = []
    seen_ids: dict = {}
    seen_names: dict = {}
    for k, entry in enumerate(agents_raw):
        path = f"agents[{k}]"
        spec = _parse_agent(entry, path, lenient, warnings)
        if spec.id in seen_ids:
            raise DuplicateId(f"agent id {spec.id} already used by {seen_ids[spec.id]}", path)
        if spec.name in seen_names:
            raise DuplicateId(f"agent name {spec.name!r} already used", path)
        seen_ids[spec.id] = spec.name
        seen_names[spec.name] = spec.id
        specs.append(spec)

    situation_file = SituationFile(version, ordering_cost, period_note, tuple(specs))
    situation, derive_warnings = situation_from_file(situation_file)
    warnings.extend(derive_warnings)
    if not situation.soc_valid:
        warnings.append("bound-ratio condition fails: proportional rule not applicable")
    if not situation.shapley_valid:
        warnings.append("induced game is not size monotone: Shapley rule not applicable")
    return ParseResult(situation_file, situation, tuple(warnings))


def situation_from_file(situation_file: SituationFile):
    """Build the situation from a parsed file; returns (situation, warnings)."""
    warnings = []
    freqs = []
    for spec in situation_file.agents:
        derived = None
        if spec.has_demand:
            factor = spec.holding_cost / (2.0 * situation_file.ordering_cost)
            derived = Interval(
                math.sqrt(spec.demand_lo * factor), math.sqrt(spec.demand_hi * factor)
            )
        if spec.has_frequency:
            supplied = Interval(spec.m_lo, spec.m_hi)
            if derived is not None and not (
                math.isclose(supplied.lo, derived.lo, rel_tol=_FREQ_AGREE_RTOL, abs_tol=1e-12)
                and math.isclose(supplied.hi, derived.hi, rel_tol=_FREQ_AGREE_RTOL, abs_tol=1e-12)
            ):
                warnings.append(
                    f"agent {spec.name}: supplied frequencies {supplied} disagree with "
                    f"demand-derived {derived}; supplied values win"
                )
            chosen = supplied
        else:
            chosen = derived
        if spec.m_ref_lo is not None:
            if (
                abs(chosen.lo - spec.m_ref_lo) > _REF_AGREE_ATOL
                or abs(chosen.hi - spec.m_ref_hi) > _REF_AGREE_ATOL
            ):
                warnings.append(
                    f"agent {spec.name}: reference frequencies [{spec.m_ref_lo:g}, {spec.m_ref_hi:g}] "
                    f"differ from operative {chosen} by more than {_REF_AGREE_ATOL}"
                )
        freqs.append(chosen)
    labels = tuple(spec.name for spec in situation_file.agents)
    situation = IntervalInventorySituation(
        AgentSet(labels), situation_file.ordering_cost, tuple(freqs)
    )
    return situation, warnings


def _format_number(value: float) -> str:
    # repr of a float round-trips exactly and is valid TOML; integers in
    # float fields stay readable as "200.0".
    return repr(float(value))


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_situation(situation_file: SituationFile) -> str:
    """Canonical TOML rendering: fixed field order, exact floats."""
    lines = [
        f"version = {situation_file.version}",
        f"ordering_cost = {_format_number(situation_file.ordering_cost)}",
        f"period_note = {_quote(situation_file.period_note)}",
    ]
    for spec in situation_file.agents:
        lines.append("")
        lines.append("[[agents]]")
        lines.append(f"id = {spec.id}")
        lines.append(f"name = {_quote(spec.name)}")
        for key in (
            "demand_lo",
            "demand_hi",
            "holding_cost",
            "m_lo",
            "m_hi",
            "m_ref_lo",
            "m_ref_hi",
        ):
            value = getattr(spec, key)
            if value is not None:
                lines.append(f"{key} = {_format_number(value)}")
    lines.append("")
    return "\n".join(lines)


def _read_source(source: Union[str, Path], bundled: tuple) -> bytes:
    path = Path(source)
    if path.exists():
        return path.read_bytes()
    name = str(source)
    if name in bundled:
        return resources.files("ieoq").joinpath(f"data/{name}.toml").read_bytes()
    raise FileNotFoundError(f"no such file or bundled dataset: {source}")


def load_situation(source: Union[str, Path], lenient: bool = False) -> ParseResult:
    """Parse a situation from a path or a bundled dataset name."""
    return parse_situation(_read_source(source, BUNDLED_SITUATIONS), lenient=lenient)


def bundled_path_hint(name: str) -> str:
    """Where a bundled dataset lives, for diagnostics."""
    return str(resources.files("ieoq").joinpath(f"data/{name}.toml"))


@dataclass(frozen=True)
class AirportTraffic:
    id: int
    name: str
    annual_passengers: int


@dataclass(frozen=True)
class TrafficFile:
    """Annual passenger traffic plus the conversion parameters to demand."""

    purchase_rate: float  # fraction of passengers buying one unit per year
    seasonal_variation: float  # +/- fraction around the monthly midpoint
    ordering_cost: float
    unit_holding_costs: dict  # airport id -> holding cost
    airports: tuple


_TRAFFIC_FIELDS = {
    "purchase_rate",
    "seasonal_variation",
    "ordering_cost",
    "unit_holding_costs",
    "airports",
}
_AIRPORT_FIELDS = {"id", "name", "annual_passengers"}


def parse_traffic(text: Union[str, bytes], lenient: bool = False) -> TrafficFile:
    """Parse a traffic file."""
    data = _load_toml(text)
    warnings: list = []
    _check_unknown(data, _TRAFFIC_FIELDS, "", lenient, warnings)
    for key in ("purchase_rate", "seasonal_variation", "ordering_cost"):
        _require(data, key, "")
    purchase_rate = _get_number(data, "purchase_rate", "")
    if not 0 < purchase_rate <= 1:
        raise SchemaError("must be in (0, 1]", "purchase_rate")
    seasonal_variation = _get_number(data, "seasonal_variation", "")
    if not 0 <= seasonal_variation < 1:
        raise SchemaError("must be in [0, 1)", "seasonal_variation")
    ordering_cost = _get_number(data, "ordering_cost", "")
    if not ordering_cost > 0:
        raise SchemaError("must be positive", "ordering_cost")

    costs_raw = data.get("unit_holding_costs")
    if not isinstance(costs_raw, dict) or not costs_raw:
        raise SchemaError("need a nonempty table", "unit_holding_costs")
    holding_costs = {}
    for key, value in costs_raw.items():
        try:
            airport_id = int(key)
        except ValueError:
            raise SchemaError("keys must be airport ids", f"unit_holding_costs.{key}") from None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise SchemaError("must be a positive number", f"unit_holding_costs.{key}")
        holding_costs[airport_id] = float(value)

    airports_raw = data.get("airports")
    if not isinstance(airports_raw, list) or not airports_raw:
        raise SchemaError("need a nonempty [[airports]] list", "airports")
    airports = []
    seen_ids: set = set()
    for k, entry in enumerate(airports_raw):
        path = f"airports[{k}]"
        if not isinstance(entry, dict):
            raise SchemaError("airport entry must be a table", path)
        _check_unknown(entry, _AIRPORT_FIELDS, path, lenient, warnings)
        for key in _AIRPORT_FIELDS:
            _require(entry, key, path)
        airport_id = _get_int(entry, "id", path)
        name = entry["name"]
        if not isinstance(name, str) or not name:
            raise SchemaError("must be a nonempty string", _join(path, "name"))
        passengers = _get_int(entry, "annual_passengers", path)
        if passengers < 0:
            raise SchemaError("must be nonnegative", _join(path, "annual_passengers"))
        if airport_id in seen_ids:
            raise DuplicateId(f"airport id {airport_id} already used", path)
        seen_ids.add(airport_id)
        if airport_id not in holding_costs:
            raise SchemaError(f"no unit holding cost for airport id {airport_id}", path)
        airports.append(AirportTraffic(airport_id, name, passengers))

    return TrafficFile(
        purchase_rate, seasonal_variation, ordering_cost, holding_costs, tuple(airports)
    )


def load_traffic(source: Union[str, Path], lenient: bool = False) -> TrafficFile:
    """Parse a traffic file from a path or the bundled `traffic2023` demo."""
    return parse_traffic(_read_source(source, ("traffic2023",)), lenient=lenient)


def _round_to_hundred(value: float) -> float:
    return 100.0 * round(value / 100.0)


def ingest_traffic(traffic: TrafficFile) -> SituationFile:
    """Situation file with monthly demand intervals derived from annual traffic.

    midpoint = annual passengers * purchase rate / 12; the bounds stretch
    it by the seasonal variation and are rounded to the nearest hundred
    units so derived files carry no spurious precision.
    """
    specs = []
    for airport in traffic.airports:
        midpoint = airport.annual_passengers * traffic.purchase_rate / 12.0
        specs.append(
            AgentSpec(
                id=airport.id,
                name=airport.name,
                demand_lo=_round_to_hundred(midpoint * (1.0 - traffic.seasonal_variation)),
                demand_hi=_round_to_hundred(midpoint * (1.0 + traffic.seasonal_variation)),
                holding_cost=traffic.unit_holding_costs[airport.id],
            )
        )
    return SituationFile(
        SCHEMA_VERSION,
        traffic.ordering_cost,
        "monthly demand derived from annual passenger traffic",
        tuple(specs),
    )

"""Allocation and property reports with table, CSV and JSON renderings.

All three renderings of one report carry the same numbers: currency at two
decimals in the table and CSV, full precision in the JSON. Building a
report does all the computation; rendering is pure formatting.
"""

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional

from .games import coalition_members, describe_coalition
from .intervals import Interval, length
from .inventory import (
    IntervalInventorySituation,
    interval_game_value,
    materialize_game,
    validate_size_monotonic,
    validate_soc_condition,
)
from .rules import (
    IntervalAllocation,
    PropertyReport,
    check_bc,
    check_cca,
    check_iae,
    check_tba,
    individual_costs,
    interval_core_contains,
    interval_shapley,
    interval_shapley_sampled,
    interval_soc,
    proportional_to_frequency,
)
from .intervals import scale

__all__ = [
    "AllocationReport",
    "PropertyRunReport",
    "RuleColumn",
    "build_allocation_report",
    "build_property_report",
    "render_csv",
    "render_json",
    "render_properties_text",
    "render_table",
]

RULE_TITLES = {
    "individual": "Individual",
    "soc": "SOC rule",
    "shapley": "Shapley rule",
}


@dataclass(frozen=True)
class RuleColumn:
    key: str  # "individual" | "soc" | "shapley"
    title: str
    shares: tuple
    total: Interval
    note: str = ""


@dataclass(frozen=True)
class AllocationReport:
    source: str
    agent_ids: tuple
    agent_names: tuple
    ordering_cost: float
    joint_cost: Interval
    columns: tuple
    soc_valid: bool
    shapley_valid: bool
    warnings: tuple = ()
    # Diagnostic frequency-proportional split, reported alongside the SOC
    # column in table and JSON output; never part of the CSV contract.
    frequency_proportional: Optional[tuple] = None


def _column(key: str, allocation: IntervalAllocation, note: str = "") -> RuleColumn:
    return RuleColumn(key, RULE_TITLES[key], allocation.shares, allocation.total(), note)


def build_allocation_report(
    situation: IntervalInventorySituation,
    source: str,
    rule: str = "all",
    agent_ids: Optional[tuple] = None,
    samples: Optional[int] = None,
    seed: int = 0,
    warnings: tuple = (),
) -> AllocationReport:
    """Compute the requested rule columns for one situation.

    `rule` is one of individual, soc, shapley or all. `samples` switches
    the Shapley column to the sampled estimator (with a note recording
    samples and seed) unless it covers all agent orders, in which case the
    exact value is used and the note says so.
    """
    if rule not in {"individual", "soc", "shapley", "all"}:
        raise ValueError(f"unknown rule {rule!r}")
    n = situation.n
    ids = tuple(agent_ids) if agent_ids is not None else tuple(range(1, n + 1))
    columns = []
    extra_warnings = list(warnings)
    freq_prop = None
    if rule in ("individual", "all"):
        columns.append(_column("individual", individual_costs(situation)))
    if rule in ("soc", "all"):
        columns.append(_column("soc", interval_soc(situation)))
        freq_prop = proportional_to_frequency(situation).shares
    if rule in ("shapley", "all"):
        note = ""
        if samples is not None and samples < math.factorial(n):
            allocation = interval_shapley_sampled(situation, samples, seed)
            note = f"sampled, {samples} permutations, seed {seed}"
        else:
            allocation = interval_shapley(situation)
            if samples is not None:
                note = f"requested {samples} samples covers all {n}! orders; computed exactly"
        columns.append(_column("shapley", allocation, note))
    joint = interval_game_value(situation, situation.agents.grand_coalition)
    return AllocationReport(
        source=source,
        agent_ids=ids,
        agent_names=situation.agents.labels,
        ordering_cost=situation.ordering_cost,
        joint_cost=joint,
        columns=tuple(columns),
        soc_valid=situation.soc_valid,
        shapley_valid=situation.shapley_valid,
        warnings=tuple(extra_warnings),
        frequency_proportional=freq_prop,
    )


def _money(value: float) -> str:
    return f"{value:.2f}"


def _interval_cell(share: Interval) -> str:
    return f"[{_money(share.lo)}, {_money(share.hi)}]"


def render_table(report: AllocationReport, color: bool = False) -> str:
    """Fixed-width text table; one share column and one length column per rule."""
    bold = ("\x1b[1m", "\x1b[0m") if color else ("", "")
    headers = ["agent", "name"]
    for column in report.columns:
        headers.append(column.title)
        headers.append("length")
    rows = []
    for i, name in enumerate(report.agent_names):
        row = [str(report.agent_ids[i]), name]
        for column in report.columns:
            row.append(_interval_cell(column.shares[i]))
            row.append(_money(length(column.shares[i])))
        rows.append(row)
    total_row = ["", "TOTAL"]
    for column in report.columns:
        total_row.append(_interval_cell(column.total))
        total_row.append(_money(length(column.total)))
    rows.append(total_row)

    widths = [len(h) for h in headers]
    for row in rows:
        for k, cell in enumerate(row):
            widths[k] = max(widths[k], len(cell))

    def fmt(row):
        return "  ".join(cell.rjust(widths[k]) if k >= 2 else cell.ljust(widths[k])
                         for k, cell in enumerate(row))

    lines = [
        f"{bold[0]}{report.source}: ordering cost {_money(report.ordering_cost)}, "
        f"joint cost {_interval_cell(report.joint_cost)}{bold[1]}",
        f"{bold[0]}{fmt(headers)}{bold[1]}",
    ]
    lines.extend(fmt(row) for row in rows)
    lines.append(
        f"flags: soc_valid={str(report.soc_valid).lower()} "
        f"shapley_valid={str(report.shapley_valid).lower()}"
    )
    for column in report.columns:
        if column.note:
            lines.append(f"note ({column.title}): {column.note}")
    if report.frequency_proportional is not None:
        cells = ", ".join(
            f"{name} {_interval_cell(share)}"
            for name, share in zip(report.agent_names, report.frequency_proportional)
        )
        lines.append(f"frequency-proportional reference: {cells}")
    for warning in report.warnings:
        lines.append(f"warning: {warning}")
    return "\n".join(lines) + "\n"


def render_csv(report: AllocationReport) -> str:
    """CSV rendering.

    Single rule: columns agent,name,lo,hi,length with agent ids.
    All three rules: one row per agent keyed by name with columns
    agent,ic_lo,ic_hi,soc_lo,soc_hi,sh_lo,sh_hi,L_IC,L_SOC,L_Sh.
    A TOTAL row closes either layout.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    columns = {column.key: column for column in report.columns}
    if len(report.columns) == 1:
        column = report.columns[0]
        writer.writerow(["agent", "name", "lo", "hi", "length"])
        for i, name in enumerate(report.agent_names):
            share = column.shares[i]
            writer.writerow(
                [report.agent_ids[i], name, _money(share.lo), _money(share.hi), _money(length(share))]
            )
        writer.writerow(
            ["TOTAL", "", _money(column.total.lo), _money(column.total.hi), _money(length(column.total))]
        )
    elif set(columns) == {"individual", "soc", "shapley"}:
        writer.writerow(
            ["agent", "ic_lo", "ic_hi", "soc_lo", "soc_hi", "sh_lo", "sh_hi", "L_IC", "L_SOC", "L_Sh"]
        )
        ic, soc, sh = columns["individual"], columns["soc"], columns["shapley"]
        for i, name in enumerate(report.agent_names):
            writer.writerow(
                [
                    name,
                    _money(ic.shares[i].lo),
                    _money(ic.shares[i].hi),
                    _money(soc.shares[i].lo),
                    _money(soc.shares[i].hi),
                    _money(sh.shares[i].lo),
                    _money(sh.shares[i].hi),
                    _money(length(ic.shares[i])),
                    _money(length(soc.shares[i])),
                    _money(length(sh.shares[i])),
                ]
            )
        writer.writerow(
            [
                "TOTAL",
                _money(ic.total.lo),
                _money(ic.total.hi),
                _money(soc.total.lo),
                _money(soc.total.hi),
                _money(sh.total.lo),
                _money(sh.total.hi),
                _money(length(ic.total)),
                _money(length(soc.total)),
                _money(length(sh.total)),
            ]
        )
    else:
        raise ValueError("CSV layout needs exactly one rule or all three")
    return buffer.getvalue()


def _interval_json(share: Interval) -> dict:
    return {"lo": share.lo, "hi": share.hi, "length": length(share)}


def render_json(report: AllocationReport) -> str:
    """JSON rendering at full float precision."""
    payload = {
        "source": report.source,
        "ordering_cost": report.ordering_cost,
        "joint_cost": _interval_json(report.joint_cost),
        "flags": {"soc_valid": report.soc_valid, "shapley_valid": report.shapley_valid},
        "agents": [
            {"id": report.agent_ids[i], "name": name}
            for i, name in enumerate(report.agent_names)
        ],
        "rules": [
            {
                "rule": column.key,
                "note": column.note,
                "shares": [_interval_json(s) for s in column.shares],
                "total": _interval_json(column.total),
            }
            for column in report.columns
        ],
        "warnings": list(report.warnings),
    }
    if report.frequency_proportional is not None:
        payload["frequency_proportional_reference"] = [
            _interval_json(s) for s in report.frequency_proportional
        ]
    return json.dumps(payload, indent=2) + "\n"


@dataclass(frozen=True)
class PropertyRunReport:
    source: str
    rule: str
    checks: tuple  # of PropertyReport
    all_hold: bool


_CHECK_ORDER = ("cca", "iae", "tba", "bc", "core")

_RULES_FOR_PROPERTIES = {
    "soc": interval_soc,
    "shapley": interval_shapley,
}


def _half_weight_situation(situation: IntervalInventorySituation) -> IntervalInventorySituation:
    half = 1.0 / math.sqrt(2.0)
    return IntervalInventorySituation(
        situation.agents,
        situation.ordering_cost,
        tuple(scale(half, f) for f in situation.frequencies),
    )


def build_property_report(
    situation: IntervalInventorySituation, source: str, rule: str, checks: tuple
) -> PropertyRunReport:
    """Run the requested property checks for one rule on one situation.

    The transfer-additivity check uses the self-split instance: both sides
    carry the situation's frequencies scaled by 1/sqrt(2), whose
    combination reproduces the situation itself.
    """
    if rule not in _RULES_FOR_PROPERTIES:
        raise ValueError(f"unknown rule {rule!r}, expected soc or shapley")
    rule_fn = _RULES_FOR_PROPERTIES[rule]
    unknown = set(checks) - set(_CHECK_ORDER)
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(sorted(unknown))}")
    ordered = [c for c in _CHECK_ORDER if c in set(checks)]
    results = []
    for check in ordered:
        if check == "cca":
            results.append(check_cca(situation, rule_fn(situation)))
        elif check == "iae":
            results.append(check_iae(rule_fn, situation))
        elif check == "tba":
            half = _half_weight_situation(situation)
            results.append(check_tba(rule_fn, half, half))
        elif check == "bc":
            results.append(check_bc(rule_fn, situation))
        elif check == "core":
            game = materialize_game(situation)
            results.append(interval_core_contains(game, rule_fn(situation)))
    return PropertyRunReport(
        source=source,
        rule=rule,
        checks=tuple(results),
        all_hold=all(r.holds for r in results),
    )


def _describe_subject(subject, agent_names) -> str:
    if isinstance(subject, int):
        members = coalition_members(subject)
        if len(members) == 1:
            return f"agent {agent_names[members[0]]}"
        return "{" + ", ".join(agent_names[i] for i in members) + "}"
    if isinstance(subject, tuple):
        return "(" + ", ".join(agent_names[i] for i in subject) + ")"
    return str(subject)


def render_properties_text(run: PropertyRunReport, agent_names: tuple) -> str:
    """One line per check plus witness detail for failures."""
    lines = [f"{run.source}: rule {run.rule}"]
    for report in run.checks:
        status = "holds" if report.holds else "FAILS"
        lines.append(f"{report.name}: {status} (tolerance {report.tolerance:g})")
        for witness in report.witnesses[:5]:
            subject = witness.subject
            # CCA and core witnesses use coalition bitmasks; the others
            # index agents or agent pairs.
            if report.name in ("CCA", "CORE") and isinstance(subject, int):
                where = _describe_subject(subject, agent_names)
            elif report.name == "IAE" and isinstance(subject, int):
                where = f"agent {agent_names[subject]}"
            elif report.name == "TBA" and isinstance(subject, int):
                where = f"agent {agent_names[subject]}"
            else:
                where = _describe_subject(subject, agent_names)
            lines.append(f"  witness {where}: {witness.lhs} vs {witness.rhs}")
        if len(report.witnesses) > 5:
            lines.append(f"  ... and {len(report.witnesses) - 5} more witnesses")
        for subject, reason in report.skipped:
            lines.append(f"  skipped {_describe_subject(subject, agent_names)}: {reason}")
    verdict = "all checks hold" if run.all_hold else "some checks fail"
    lines.append(verdict)
    return "\n".join(lines) + "\n"

"""Command-line driver: validate, allocate, properties, ingest.

Exit codes: 0 success, 1 unreadable or malformed input, 2 input that
parses but fails validation or a rule precondition. Reports go to stdout;
warnings and notices to stderr so CSV and JSON output stay machine-clean.
"""

import argparse
import os
import sys
from pathlib import Path

from .inventory import AllZeroFrequencies, TooManyAgents, validate_soc_condition
from .reporting import (
    build_allocation_report,
    build_property_report,
    render_csv,
    render_json,
    render_properties_text,
    render_table,
)
from .rules import (
    CombinedSituationInvalid,
    NotSizeMonotonic,
    SocConditionViolated,
)
from .situationio import (
    SchemaError,
    ingest_traffic,
    load_situation,
    load_traffic,
    serialize_situation,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVALID = 2

_PRECONDITION_ERRORS = (
    SocConditionViolated,
    NotSizeMonotonic,
    AllZeroFrequencies,
    CombinedSituationInvalid,
    TooManyAgents,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ieoq",
        description="Joint inventory cost allocation under interval demand uncertainty.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="parse a situation file and check rule preconditions")
    validate.add_argument("source", help="situation file path or bundled dataset name")
    validate.add_argument("--lenient", action="store_true", help="warn on unknown fields instead of failing")

    allocate = sub.add_parser("allocate", help="compute interval cost shares")
    allocate.add_argument("source", help="situation file path or bundled dataset name")
    allocate.add_argument(
        "--rule",
        choices=["individual", "soc", "shapley", "all"],
        default="all",
        help="which allocation to compute (default: all)",
    )
    allocate.add_argument("--samples", type=int, default=None, help="use the sampled Shapley estimator")
    allocate.add_argument("--seed", type=int, default=0, help="seed for the sampled estimator (default: 0)")
    allocate.add_argument(
        "--format", choices=["table", "csv", "json"], default="table", help="output format (default: table)"
    )
    allocate.add_argument("--lenient", action="store_true", help="warn on unknown fields instead of failing")

    properties = sub.add_parser("properties", help="check allocation-rule properties")
    properties.add_argument("source", help="situation file path or bundled dataset name")
    properties.add_argument("--rule", choices=["soc", "shapley"], required=True)
    properties.add_argument(
        "--checks",
        default="cca,iae,tba,bc,core",
        help="comma-separated subset of cca,iae,tba,bc,core (default: all)",
    )
    properties.add_argument("--lenient", action="store_true", help="warn on unknown fields instead of failing")

    ingest = sub.add_parser("ingest", help="derive a situation file from passenger traffic")
    ingest.add_argument("source", help="traffic file path or bundled dataset name")
    ingest.add_argument("-o", "--output", default=None, help="situation file to write (default: stdout)")

    return parser


def _color_allowed() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _emit_warnings(warnings) -> None:
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)


def run_validate(source: str, lenient: bool = False) -> tuple:
    """Returns (text, exit code). Exit 0 only when both rule flags hold."""
    result = load_situation(source, lenient=lenient)
    situation = result.situation
    lines = [
        f"{source}: {situation.n} agents, ordering cost {situation.ordering_cost:g}",
    ]
    try:
        condition = validate_soc_condition(situation)
        lines.append(
            f"soc_valid={str(situation.soc_valid).lower()} "
            f"(max agent ratio {max(condition.agent_ratios):.4f}, "
            f"aggregate ratio {condition.aggregate_ratio:.4f}, margin {condition.margin:+.4f})"
        )
    except AllZeroFrequencies:
        lines.append("soc_valid=true (all agents inactive; nothing to allocate)")
    lines.append(f"shapley_valid={str(situation.shapley_valid).lower()}")
    code = EXIT_OK if situation.soc_valid and situation.shapley_valid else EXIT_INVALID
    return "\n".join(lines) + "\n", code, result.warnings


def run_allocate(
    source: str,
    rule: str = "all",
    samples=None,
    seed: int = 0,
    fmt: str = "table",
    lenient: bool = False,
    color: bool = False,
) -> tuple:
    """Returns (rendered report, exit code, warnings)."""
    result = load_situation(source, lenient=lenient)
    ids = tuple(spec.id for spec in result.file.agents)
    report = build_allocation_report(
        result.situation,
        source=str(source),
        rule=rule,
        agent_ids=ids,
        samples=samples,
        seed=seed,
        warnings=result.warnings,
    )
    if fmt == "csv":
        return render_csv(report), EXIT_OK, result.warnings
    if fmt == "json":
        return render_json(report), EXIT_OK, result.warnings
    return render_table(report, color=color), EXIT_OK, result.warnings


def run_properties(source: str, rule: str, checks: str, lenient: bool = False) -> tuple:
    """Returns (rendered report, exit code, warnings)."""
    wanted = tuple(part.strip() for part in checks.split(",") if part.strip())
    if not wanted:
        raise ValueError("no checks requested")
    result = load_situation(source, lenient=lenient)
    run = build_property_report(result.situation, str(source), rule, wanted)
    text = render_properties_text(run, result.situation.agents.labels)
    return text, EXIT_OK if run.all_hold else EXIT_INVALID, result.warnings


def run_ingest(source: str, output=None) -> tuple:
    """Returns (serialized situation or confirmation, exit code)."""
    traffic = load_traffic(source)
    situation_file = ingest_traffic(traffic)
    text = serialize_situation(situation_file)
    if output is None:
        return text, EXIT_OK
    Path(output).write_text(text, encoding="utf-8")
    return f"wrote {len(situation_file.agents)} agents to {output}\n", EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            text, code, warnings = run_validate(args.source, lenient=args.lenient)
            _emit_warnings(warnings)
            sys.stdout.write(text)
            return code
        if args.command == "allocate":
            if args.samples is not None and args.samples < 1:
                print("error: --samples must be >= 1", file=sys.stderr)
                return EXIT_INVALID
            text, code, warnings = run_allocate(
                args.source,
                rule=args.rule,
                samples=args.samples,
                seed=args.seed,
                fmt=args.format,
                lenient=args.lenient,
                color=args.format == "table" and _color_allowed(),
            )
            _emit_warnings(warnings)
            sys.stdout.write(text)
            return code
        if args.command == "properties":
            text, code, warnings = run_properties(
                args.source, rule=args.rule, checks=args.checks, lenient=args.lenient
            )
            _emit_warnings(warnings)
            sys.stdout.write(text)
            return code
        if args.command == "ingest":
            text, code = run_ingest(args.source, output=args.output)
            sys.stdout.write(text)
            return code
        raise AssertionError(f"unhandled command {args.command}")
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _PRECONDITION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())

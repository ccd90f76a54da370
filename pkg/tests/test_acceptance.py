"""The package's shipped guarantees, one test per guarantee.

Each test prints a single verdict line (visible with `pytest -s`), then
asserts. Tolerances are stated inline; reference numbers come from
tests/casestudy.py and are rounded to two decimals unless noted.
"""

import csv
import io
import math
import subprocess
import sys

import numpy as np

from ieoq import (
    IntervalAgent,
    Interval,
    build_situation_from_demand,
    check_bc,
    check_cca,
    check_iae,
    check_tba,
    fixture_no_iae,
    fixture_no_iae_witness,
    fixture_no_tba,
    fixture_no_tba_witness,
    individual_costs,
    interval_game_value,
    interval_shapley,
    interval_shapley_sampled,
    interval_soc,
    is_concave,
    materialize_game,
    proportional_to_frequency,
    sub_checked,
    weakly_geq,
)
from ieoq.intervals import WidthViolation
from ieoq.reporting import build_allocation_report, render_csv

from casestudy import (
    AIRPORT_DATA,
    EXAMPLE2_SHAPLEY_2DP,
    EXAMPLE2_TOTAL_2DP,
    ORDERING_COST,
    REFERENCE_IC,
    REFERENCE_M,
    REFERENCE_SHAPLEY,
    REFERENCE_SOC_PROPORTIONAL,
    REFERENCE_TOTAL,
    airports_situation,
    example1_situation,
    example2_situation,
)
from helpers import random_pair, random_situation


def verdict(label, failures):
    flag = "PASS" if not failures else "FAIL"
    print(f"[{flag}] {label}")
    assert not failures, f"{label}:\n  " + "\n  ".join(failures)


def expect(failures, ok, message):
    if not ok:
        failures.append(message)


def expect_close(failures, what, got, want, atol=0.0, rtol=0.0):
    if abs(got - want) > atol + rtol * abs(want):
        failures.append(f"{what}: got {got!r}, want {want!r} (atol={atol}, rtol={rtol})")


def joint_cost(situation):
    return interval_game_value(situation, situation.agents.grand_coalition)


def test_c01_three_agent_squared_rule_closed_forms():
    """interval_soc on (a=1, m=[1,2],[2,3],[3,4]) matches the closed forms at 1e-9."""
    failures = []
    shares = interval_soc(example1_situation())
    r14, r29 = math.sqrt(14.0), math.sqrt(29.0)
    expected = [(2 / r14, 8 / r29), (8 / r14, 18 / r29), (18 / r14, 32 / r29)]
    for k, (share, (lo, hi)) in enumerate(zip(shares, expected), start=1):
        expect_close(failures, f"agent {k} lower", share.lo, lo, atol=1e-9)
        expect_close(failures, f"agent {k} upper", share.hi, hi, atol=1e-9)
    verdict("C1 three-agent squared-frequency rule, closed forms at 1e-9", failures)


def test_c02_three_agent_shapley_reference_values():
    """interval_shapley on (a=1, m=[1,3],[2,4],[3,5]) matches the 2 d.p. values."""
    failures = []
    shares = interval_shapley(example2_situation())
    for k, (share, (lo, hi)) in enumerate(zip(shares, EXAMPLE2_SHAPLEY_2DP), start=1):
        expect_close(failures, f"agent {k} lower", share.lo, lo, atol=0.01)
        expect_close(failures, f"agent {k} upper", share.hi, hi, atol=0.01)
    total = shares.total()
    expect_close(failures, "total lower", total.lo, EXAMPLE2_TOTAL_2DP[0], atol=0.01)
    expect_close(failures, "total upper", total.hi, EXAMPLE2_TOTAL_2DP[1], atol=0.01)
    verdict("C2 three-agent Shapley rule, reference values at 0.01", failures)


def test_c03_case_study_frequencies_and_total():
    """Demand-derived frequencies match the reference bounds at 0.01, the
    joint cost matches the reference total at 0.5."""
    failures = []
    situation = build_situation_from_demand(
        [IntervalAgent(Interval(lo, hi), h) for _, lo, hi, h in AIRPORT_DATA],
        ORDERING_COST,
        labels=[name for name, *_ in AIRPORT_DATA],
    )
    for name, f in zip(situation.agents.labels, situation.frequencies):
        lo, hi = REFERENCE_M[name]
        expect_close(failures, f"{name} m lower", f.lo, lo, atol=0.01)
        expect_close(failures, f"{name} m upper", f.hi, hi, atol=0.01)
    joint = joint_cost(situation)
    expect_close(failures, "joint cost lower", joint.lo, REFERENCE_TOTAL[0], atol=0.5)
    expect_close(failures, "joint cost upper", joint.hi, REFERENCE_TOTAL[1], atol=0.5)
    verdict("C3 case-study frequencies at 0.01 and joint cost at 0.5", failures)


def test_c04_individual_cost_column():
    """Stand-alone costs 2a*m_i match the reference column: bounds and
    interval lengths at 0.5."""
    failures = []
    situation = airports_situation()
    for name, share in zip(situation.agents.labels, individual_costs(situation)):
        lo, hi, width = REFERENCE_IC[name]
        expect_close(failures, f"{name} lower", share.lo, lo, atol=0.5)
        expect_close(failures, f"{name} upper", share.hi, hi, atol=0.5)
        expect_close(failures, f"{name} length", share.hi - share.lo, width, atol=0.5)
    verdict("C4 individual-cost column, 14 bounds and lengths at 0.5", failures)


def test_c05_shapley_column():
    """Exact border-game Shapley matches the reference column: bounds at
    0.5, lengths at 1.0, column sums at 0.5."""
    failures = []
    situation = airports_situation()
    shares = interval_shapley(situation)
    for name, share in zip(situation.agents.labels, shares):
        lo, hi, width = REFERENCE_SHAPLEY[name]
        expect_close(failures, f"{name} lower", share.lo, lo, atol=0.5)
        expect_close(failures, f"{name} upper", share.hi, hi, atol=0.5)
        expect_close(failures, f"{name} length", share.hi - share.lo, width, atol=1.0)
    total = shares.total()
    expect_close(failures, "column sum lower", total.lo, REFERENCE_TOTAL[0], atol=0.5)
    expect_close(failures, "column sum upper", total.hi, REFERENCE_TOTAL[1], atol=0.5)
    verdict("C5 Shapley column, bounds at 0.5, lengths at 1.0, sums at 0.5", failures)


def test_c06_squared_rule_efficiency_and_reference_reconstruction():
    """The squared-frequency rule is efficient (1e-6 relative) and
    coalition-acceptable on all 127 coalitions; the reference column it
    does not match is reproduced at 0.5 by the frequency-proportional
    split. The reference numbers follow the proportional recipe, not the
    squared one, and this test documents that discrepancy."""
    failures = []
    situation = airports_situation()
    shares = interval_soc(situation)
    total = shares.total()
    expect_close(failures, "efficiency lower", total.lo, REFERENCE_TOTAL[0], rtol=1e-6)
    expect_close(failures, "efficiency upper", total.hi, REFERENCE_TOTAL[1], rtol=1e-6)
    report = check_cca(situation, shares)
    expect(failures, report.holds, f"CCA violated at {len(report.witnesses)} coalitions")
    reconstruction = proportional_to_frequency(situation)
    for name, share in zip(situation.agents.labels, reconstruction):
        lo, hi, _ = REFERENCE_SOC_PROPORTIONAL[name]
        expect_close(failures, f"{name} reconstructed lower", share.lo, lo, atol=0.5)
        expect_close(failures, f"{name} reconstructed upper", share.hi, hi, atol=0.5)
    # the squared rule itself lands far from that column
    expect(
        failures,
        abs(shares[0].lo - REFERENCE_SOC_PROPORTIONAL["Madrid"][0]) > 1000.0,
        "squared rule unexpectedly matches the proportional column",
    )
    verdict(
        "C6 squared rule efficient at 1e-6 and acceptable; reference column "
        "reproduced at 0.5 by the proportional split",
        failures,
    )


def _interval_concavity_violations(situation):
    game = materialize_game(situation)
    n = situation.n
    values = [game.value(mask) for mask in range(1 << n)]
    violations = 0
    for i in range(n):
        bit = 1 << i
        for big in range(1 << n):
            if big & bit:
                continue
            small = big
            while True:
                try:
                    at_small = sub_checked(values[small | bit], values[small])
                    at_big = sub_checked(values[big | bit], values[big])
                except WidthViolation:
                    pass  # inadmissible pair: marginal widths out of order
                else:
                    if not weakly_geq(at_small, at_big):
                        violations += 1
                if small == 0:
                    break
                small = (small - 1) & big
    return violations


def test_c07_induced_games_are_concave():
    """200 random situations (n <= 6): both border games concave, and the
    interval concavity inequality holds for every admissible (S, T, i)."""
    failures = []
    rng = np.random.default_rng(2023)
    for k in range(200):
        situation = random_situation(rng)
        game = materialize_game(situation)
        expect(failures, is_concave(game.lower).holds, f"situation {k}: lower border not concave")
        expect(failures, is_concave(game.upper).holds, f"situation {k}: upper border not concave")
        bad = _interval_concavity_violations(situation)
        expect(failures, bad == 0, f"situation {k}: {bad} interval concavity violations")
    verdict("C7 induced games concave, zero violations over 200 situations", failures)


def test_c08_axiom_suite():
    """Positive and negative axiom checks at 1e-9 relative: the squared
    rule satisfies CCA, IAE and TBA; the Shapley rule satisfies CCA and BC;
    each deliberately defective fixture fails exactly its one axiom."""
    failures = []
    rng = np.random.default_rng(4057)

    half = 1.0 / math.sqrt(2.0)
    for k in range(200):
        # every third draw gets an inactive agent so IAE has teeth
        situation = random_situation(rng, require="soc", zero_agent=(k % 3 == 0))
        expect(
            failures,
            check_cca(situation, interval_soc(situation)).holds,
            f"soc CCA fails on situation {k}",
        )
        expect(
            failures,
            check_iae(interval_soc, situation).holds,
            f"soc IAE fails on situation {k}",
        )
        halved = type(situation)(
            situation.agents,
            situation.ordering_cost,
            tuple(Interval(f.lo * half, f.hi * half) for f in situation.frequencies),
        )
        expect(
            failures,
            check_tba(interval_soc, halved, halved).holds,
            f"soc self-split TBA fails on situation {k}",
        )
    for k in range(25):
        first, second = random_pair(rng, int(rng.integers(2, 5)), require="soc")
        expect(
            failures,
            check_tba(interval_soc, first, second).holds,
            f"soc TBA fails on random pair {k}",
        )

    for k in range(200):
        situation = random_situation(rng, require="monotonic-subs")
        expect(
            failures,
            check_cca(situation, interval_shapley(situation)).holds,
            f"shapley CCA fails on situation {k}",
        )
        bc = check_bc(interval_shapley, situation)
        expect(
            failures,
            bc.holds and not bc.skipped,
            f"shapley BC fails or skips on situation {k}",
        )

    bc = check_bc(interval_soc, example2_situation())
    expect(failures, not bc.holds, "soc unexpectedly balanced on the worked example")
    expect(failures, len(bc.witnesses) > 0, "soc BC failure lacks a witness pair")

    first, second = fixture_no_tba_witness()
    expect(
        failures,
        not check_tba(fixture_no_tba, first, second).holds,
        "equal-split fixture unexpectedly additive on its stored witness",
    )
    expect(
        failures,
        check_iae(fixture_no_tba, first).holds,
        "equal-split fixture charges an inactive agent",
    )

    expect(
        failures,
        not check_iae(fixture_no_iae, fixture_no_iae_witness()).holds,
        "swapped fixture unexpectedly exempts the inactive agent",
    )
    for k in range(50):
        first, second = random_pair(rng, 2, require="soc")
        expect(
            failures,
            check_tba(fixture_no_iae, first, second).holds,
            f"swapped fixture TBA fails on pair {k}",
        )
    verdict("C8 axiom suite at 1e-9: positives hold, fixtures fail as designed", failures)


def test_c09_sampling_convergence_and_determinism():
    """100000-permutation sampled Shapley on the case study is within 1%
    relative of exact on every bound, and identical (samples, seed) runs
    render bitwise-identical reports."""
    failures = []
    situation = airports_situation()
    exact = interval_shapley(situation)
    sampled = interval_shapley_sampled(situation, samples=100000, seed=0)
    for name, s, e in zip(situation.agents.labels, sampled, exact):
        expect_close(failures, f"{name} lower", s.lo, e.lo, rtol=0.01)
        expect_close(failures, f"{name} upper", s.hi, e.hi, rtol=0.01)

    def render():
        report = build_allocation_report(
            situation, source="airports2023", rule="shapley", samples=100000, seed=0
        )
        return render_csv(report)

    expect(failures, render() == render(), "repeated runs differ")
    verdict("C9 sampled rule within 1% of exact; reruns bitwise identical", failures)


def test_c10_cli_contract(tmp_path):
    """Bundled fixtures validate with exit 0; the all-rules CSV reproduces
    the reference columns at the same tolerances as C4-C6; malformed input
    exits 1 naming the offending field."""
    failures = []

    def run(*args):
        return subprocess.run(
            [sys.executable, "-m", "ieoq", *map(str, args)],
            capture_output=True,
            text=True,
            timeout=120,
        )

    for name in ("example1", "example2", "airports2023"):
        proc = run("validate", name)
        expect(failures, proc.returncode == 0, f"validate {name} exited {proc.returncode}")

    proc = run("allocate", "airports2023", "--rule", "all", "--format", "csv")
    expect(failures, proc.returncode == 0, f"allocate exited {proc.returncode}")
    rows = list(csv.reader(io.StringIO(proc.stdout)))
    body = {row[0]: row for row in rows[1:-1]}
    soc_lo_cells, soc_hi_cells = [], []
    for name, *_ in AIRPORT_DATA:
        row = body[name]
        ic_lo, ic_hi, ic_len = REFERENCE_IC[name]
        expect_close(failures, f"{name} ic_lo cell", float(row[1]), ic_lo, atol=0.5)
        expect_close(failures, f"{name} ic_hi cell", float(row[2]), ic_hi, atol=0.5)
        expect_close(failures, f"{name} L_IC cell", float(row[7]), ic_len, atol=0.5)
        sh_lo, sh_hi, sh_len = REFERENCE_SHAPLEY[name]
        expect_close(failures, f"{name} sh_lo cell", float(row[5]), sh_lo, atol=0.5)
        expect_close(failures, f"{name} sh_hi cell", float(row[6]), sh_hi, atol=0.5)
        expect_close(failures, f"{name} L_Sh cell", float(row[9]), sh_len, atol=1.0)
        soc_lo_cells.append(float(row[3]))
        soc_hi_cells.append(float(row[4]))
    expect_close(
        failures, "soc cells sum lower", math.fsum(soc_lo_cells), REFERENCE_TOTAL[0], rtol=1e-6
    )
    expect_close(
        failures, "soc cells sum upper", math.fsum(soc_hi_cells), REFERENCE_TOTAL[1], rtol=1e-6
    )

    bad = tmp_path / "broken.toml"
    bad.write_text(
        'version = 1\nordering_cost = 1.0\n\n[[agents]]\nid = 1\nname = "A"\nm_lo = "x"\nm_hi = 2.0\n',
        encoding="utf-8",
    )
    proc = run("validate", bad)
    expect(failures, proc.returncode == 1, f"malformed file exited {proc.returncode}")
    expect(
        failures,
        "agents[0].m_lo" in proc.stderr,
        "diagnostic does not name the offending field",
    )
    verdict("C10 CLI contract: fixtures validate, CSV reproduces columns, errors name fields", failures)

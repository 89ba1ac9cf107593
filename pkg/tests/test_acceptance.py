"""Acceptance gate: the eight headline guarantees at their stated tolerances.

Each test prints a single pass/fail line (run with -s to see them on
success; pytest shows them on failure regardless).  Numbers, sample
sizes, and tolerances are frozen here on purpose: loosening them is an
API break, not a tuning knob.
"""

import time
from fractions import Fraction

import numpy as np

from katolab.cli import conformity_table, twistor_symbol_rows
from katolab.fields import (
    CLOSEDNESS_TOL,
    SYMBOL_CONSISTENCY_TOL,
    run_scenario,
    scenario_grid,
)
from katolab.kato import (
    check_key_lemma,
    equality_witness,
    fuzz_hodge_inequality,
    fuzz_key_lemma,
    fuzz_operator_inequality,
    hodge_gain_pair,
    kato_gain_operator,
    key_lemma_setups,
    line_component_setup,
    matching_first_component,
    verify_spectral_bounds,
)
from katolab.spaces import fiber_space
from katolab.symbols import catalog, ellipticity_constant, twist

BASE_SEED = 20260819


def _report(num: int, label: str, ok: bool, detail: str = "") -> None:
    line = f"acceptance {num} [{label}]: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    print(line)
    assert ok, line


def test_criterion_1_conformity_table():
    t0 = time.monotonic()
    rows = conformity_table(6, 1e-12)
    worst = max(r["residual"] for r in rows)
    table_ok = all(r["ok"] for r in rows) and worst <= 1e-12

    symbol_rows = twistor_symbol_rows(6, 1e-10, samples=64)
    sym_worst = max(r["residual"] for r in symbol_rows)
    symbol_ok = all(r["ok"] for r in symbol_rows) and sym_worst <= 1e-10

    elapsed = time.monotonic() - t0
    _report(1, "conformity factors", table_ok and symbol_ok and elapsed <= 10.0,
            f"{len(rows)} factor rows, worst residual {worst:.2e}; "
            f"twistor symbol worst {sym_worst:.2e}; {elapsed:.1f}s")


def test_criterion_2_ellipticity_constants():
    t0 = time.monotonic()
    ops = [catalog("connection", 2, fiber_dim=2),
           catalog("connection", 3, fiber_dim=1),
           catalog("connection", 4, fiber_dim=3)]
    ops += [catalog("dirac", n) for n in range(2, 6)]
    ops += [catalog("twistor", n) for n in range(2, 6)]
    ops += [catalog("hodge", n, k) for n in range(2, 6)
            for k in range(1, n)]
    ops += [catalog("exterior-only", n, k)
            for n, k in ((3, 1), (4, 2), (5, 3))]
    ops += [catalog("interior-only", n, k)
            for n, k in ((3, 1), (4, 2), (5, 2))]

    declared_ok = True
    for op in ops:
        res = ellipticity_constant(op)
        if res.matches_declared(1e-9) is not True:
            declared_ok = False
        if op.epsilon == 0 and not res.epsilon <= 1e-9:
            declared_ok = False

    twist_ok = True
    for op in (catalog("dirac", 3), catalog("twistor", 3),
               catalog("hodge", 4, 1), catalog("connection", 2, fiber_dim=2)):
        base = ellipticity_constant(op).epsilon
        for d in (1, 2, 3):
            twisted = ellipticity_constant(twist(op, fiber_space(d, "aux")))
            if abs(twisted.epsilon - base) > 1e-10:
                twist_ok = False

    elapsed = time.monotonic() - t0
    _report(2, "ellipticity constants", declared_ok and twist_ok
            and elapsed <= 30.0,
            f"{len(ops)} operators, twists of 4 by fiber dims 1..3; "
            f"{elapsed:.1f}s")


def _spectral_catalog():
    return [catalog("connection", 3, fiber_dim=2),
            catalog("dirac", 2), catalog("dirac", 3), catalog("dirac", 4),
            catalog("twistor", 3), catalog("twistor", 4),
            catalog("hodge", 3, 1), catalog("hodge", 4, 1),
            catalog("hodge", 4, 2), catalog("hodge", 5, 2),
            catalog("exterior-only", 3, 1), catalog("exterior-only", 4, 2),
            catalog("interior-only", 3, 1), catalog("interior-only", 4, 2)]


def test_criterion_3_spectral_bounds():
    rng = np.random.default_rng(BASE_SEED + 3)
    worst_line = worst_perp = 0.0
    ok = True
    ops = _spectral_catalog()
    for op in ops:
        for _ in range(50):
            xi0 = rng.standard_normal(op.base_dim)
            xi0 /= np.linalg.norm(xi0)
            b = verify_spectral_bounds(op, xi0, tol=1e-9)
            ok = ok and b.satisfied
            worst_line = min(worst_line, b.min_line_eigenvalue - b.epsilon)
            worst_perp = max(worst_perp, b.max_perp_eigenvalue
                             - (b.rho_squared - b.epsilon))
    _report(3, "line/perp spectral bounds", ok,
            f"{len(ops)} operators x 50 directions; "
            f"line slack {worst_line:.2e}, perp slack {worst_perp:.2e}")


def _lemma_setups():
    setups = []
    for n, k in ((3, 1), (4, 1), (4, 2), (5, 2)):
        setups.extend((f"{label} n={n} k={k}", C, sub, bound)
                      for label, C, sub, bound in key_lemma_setups(n, k))
    for op in (catalog("dirac", 3), catalog("twistor", 3),
               catalog("hodge", 4, 2)):
        setups.append(line_component_setup(op))
    return setups


def test_criterion_4_key_lemma():
    fuzz_ok = True
    min_rel = 0.0
    setups = _lemma_setups()
    for i, (label, C, sub, _) in enumerate(setups):
        rep = fuzz_key_lemma(C, sub, 100_000, BASE_SEED + 40 + i, label=label)
        fuzz_ok = fuzz_ok and rep.violations == 0
        min_rel = min(min_rel, rep.min_relative_margin)

    witness_ok = True
    worst_ratio_gap = 0.0
    worst_margin = 0.0
    for label, C, sub, bound in setups:
        u2, ratio = equality_witness(C, sub)
        worst_ratio_gap = max(worst_ratio_gap, abs(ratio - bound))
        u1 = matching_first_component(C, u2)
        verdict = check_key_lemma(C, sub, u1, u2, c=2.0)
        rel = abs(verdict.margin) / verdict.scale
        worst_margin = max(worst_margin, rel)
        if abs(ratio - bound) > 1e-8 or rel >= 1e-6:
            witness_ok = False

    _report(4, "two-component lemma", fuzz_ok and witness_ok,
            f"{len(setups)} restrictions x 1e5 samples, "
            f"min relative margin {min_rel:.2e}; witness ratio gap "
            f"{worst_ratio_gap:.2e}, witness margin {worst_margin:.2e}")


def test_criterion_5_operator_inequality():
    ops = [("dirac", n, None) for n in (2, 3, 4)]
    ops += [("twistor", n, None) for n in (3, 4)]
    ops += [("connection", 3, None), ("hodge", 4, 2)]

    fuzz_ok = True
    constants_ok = True
    for i, (name, n, k) in enumerate(ops):
        op = (catalog(name, n, k) if k is not None
              else catalog(name, n, fiber_dim=2) if name == "connection"
              else catalog(name, n))
        rep = fuzz_operator_inequality(op, 100_000, BASE_SEED + 50 + i)
        fuzz_ok = fuzz_ok and rep.violations == 0
        if name in ("dirac", "twistor", "hodge"):
            if rep.branch_counts["vanishing"] == 0:
                constants_ok = False
        if name == "dirac":
            want = kato_gain_operator(0, Fraction(n), Fraction(1), True)
            if want != Fraction(1, n - 1) or 1 + want != Fraction(n, n - 1):
                constants_ok = False
            if abs(rep.to_json_dict()["gain_vanishing"] - float(want)) > 1e-12:
                constants_ok = False
        if name == "twistor":
            want = kato_gain_operator(0, Fraction(1), Fraction(n - 1, n), True)
            if want != n - 1 or 1 + want != Fraction(n):
                constants_ok = False
            if abs(rep.to_json_dict()["gain_vanishing"] - float(want)) > 1e-12:
                constants_ok = False

    _report(5, "general first-order inequality", fuzz_ok and constants_ok,
            f"{len(ops)} operators x 1e5 samples; kernel-branch constants "
            "n/(n-1) and n confirmed exactly")


def test_criterion_6_form_inequality_and_consistency():
    fuzz_ok = True
    min_rel = 0.0
    count = 0
    for n in range(2, 6):
        for k in range(1, n):
            rep = fuzz_hodge_inequality(n, k, 1, 100_000,
                                        BASE_SEED + 60 + 10 * n + k)
            fuzz_ok = fuzz_ok and rep.violations == 0
            min_rel = min(min_rel, rep.min_relative_margin)
            count += 1

    identity_ok = True
    for n in range(2, 9):
        for k in range(1, n):
            eps = catalog("hodge", n, k).epsilon
            if eps / (1 - eps) != min(Fraction(1, k), Fraction(1, n - k)):
                identity_ok = False

    _report(6, "two-sided form inequality", fuzz_ok and identity_ok,
            f"{count} (n,k) pairs x 1e5 samples, both forms, min relative "
            f"margin {min_rel:.2e}; refined-gain identity exact for n <= 8")


def test_criterion_7_application_constants():
    ok = True

    ym4 = 1 + hodge_gain_pair(0, 0, 4, 2, True, True).overall
    ym6 = 1 + hodge_gain_pair(0, 0, 6, 2, True, True).overall
    ok = ok and ym4 == Fraction(3, 2) and ym6 == Fraction(5, 4)

    for n in range(2, 7):
        for c in (Fraction(1), Fraction(3, 7), Fraction(10)):
            dirac = kato_gain_operator(c, Fraction(n), Fraction(1), False)
            ok = ok and dirac == c / (1 + (n - 1) * c)
            tw = kato_gain_operator(c, Fraction(1), Fraction(n - 1, n), False)
            ok = ok and tw == (n - 1) * c / (n + c)

    for n in range(2, 9):
        c_star = Fraction(2 * n, n + 1)
        pair = hodge_gain_pair(Fraction(0), c_star, n, 1, True, False)
        want = 2 / (2 * n - 1 + Fraction(1, n))
        ok = (ok and pair.dstar_gain == want
              and pair.overall == want
              and want == Fraction(2 * n, 2 * n * n - n + 1))

    _report(7, "application constants", ok,
            "curvature 3/2 and 5/4, spinor and twistor interpolations, "
            "comparison gain 2/(2n-1+1/n), all as exact rationals")


def test_criterion_8_field_lab():
    t0 = time.monotonic()
    grid = scenario_grid(range(2, 6))
    ok = True
    worst_closed = 0.0
    worst_symbol = 0.0
    failures = []
    for i, (name, n, k) in enumerate(grid):
        rep = run_scenario(name, n, k, points=10_000, seed=BASE_SEED + 80 + i)
        if rep.closedness_residual is not None:
            worst_closed = max(worst_closed, rep.closedness_residual)
        worst_symbol = max(worst_symbol, rep.symbol_residual)
        if rep.violations or not rep.passed:
            ok = False
            failures.append(f"{name}:n={n}")
    ok = ok and worst_closed <= CLOSEDNESS_TOL
    ok = ok and worst_symbol <= SYMBOL_CONSISTENCY_TOL
    elapsed = time.monotonic() - t0
    ok = ok and elapsed <= 300.0
    _report(8, "field laboratory", ok,
            f"{len(grid)} scenarios x 1e4 points, worst closedness "
            f"{worst_closed:.2e}, worst symbol residual {worst_symbol:.2e}, "
            f"{elapsed:.0f}s" + (f"; failing: {failures}" if failures else ""))

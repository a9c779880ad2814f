"""The ten acceptance criteria, at their stated sample counts and tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary.
Run directly (``python3 tests/test_acceptance.py``) to get just those lines.
"""

import random
import sys
import time
from fractions import Fraction

import pytest
import sympy as sp

import oracles as O
from abslab.catalog import CATALOG, CurvePoint, apply_point_map, build_equation, ydkn_table
from abslab.checks import (
    check_affine_linear,
    check_cube_consistency,
    check_lax_compatibility,
    check_square_symmetry,
    cube_routes,
)
from abslab.miura import (
    MIURA_NAMES,
    check_greece2,
    check_miura_roundtrip,
    check_schroedinger_reduction,
    potential_v,
    recurrence_residual,
    volterra_pushforward_check,
)
from abslab.errors import NotApplicable
from abslab.lattice import CrossData, ParameterSequence, extend_patch
from abslab.mutants import CHECKS, FAMILIES, coverage_table, mutation_coverage
from abslab.sampling import FAIL, PASS
from abslab.sim import (
    SimConfig,
    backlund_extend,
    max_residual,
    monodromy_fixed_points,
    period_four_seed,
    residual_profile,
    self_convergence_ratio,
    simulate_seed,
)
from abslab.symmetry import (
    YdKNFlow,
    check_f1_routes,
    check_five_point_compatibility,
    check_flow_commutativity,
    check_three_point_compatibility,
    check_ydkn_table,
    table_flow,
    tau_derivative,
)
import conftest

F = Fraction
EXACT = ["H1", "H2", "H3", "Q1", "Q2", "Q3"]
SEVEN = EXACT + ["Q4"]


def _eq(name):
    return build_equation(name, free_curve=True) if name == "Q4" else build_equation(name)


def criterion(k, title):
    """Record a PASS/FAIL line for criterion ``k``; failures list what broke."""

    def wrap(fn):
        def run():
            problems = []
            start = time.perf_counter()
            try:
                note = fn(problems)
            except Exception as exc:
                problems.append(f"{type(exc).__name__}: {exc}")
                note = None
            took = time.perf_counter() - start
            verdict = "FAIL" if problems else "PASS"
            detail = "; ".join(problems) if problems else (note or "")
            line = f"[{verdict}] criterion {k:>2}: {title} ({took:.1f} s){': ' + detail if detail else ''}"
            conftest.ACCEPTANCE[k] = line
            print(line)
            assert not problems, detail

        run.__name__, run.__doc__ = fn.__name__, fn.__doc__
        return run

    return wrap


def _expect(problems, label, rep, want=PASS):
    if rep.verdict != want:
        problems.append(f"{label} {rep.verdict}")


@criterion(1, "catalog integrity, affine-linearity and square symmetry")
def test_catalog_integrity(problems):
    start = time.perf_counter()
    for name in CATALOG:
        eq = _eq(name)
        for check in (check_affine_linear, check_square_symmetry):
            rep = check(eq, samples=20, rng=random.Random(f"1:{name}:{check.__name__}"))
            _expect(problems, f"{name} {check.__name__}", rep)
            if rep.samples != 20:
                problems.append(f"{name} ran {rep.samples} samples")
    # the A-list equations as images of Q1 and Q3 solutions under their point maps
    for src, dst in (("Q1", "A1"), ("Q3", "A2")):
        cross = CrossData.from_lists([F(2), F(-5, 3), F(7)], [F(3, 4), F(-2)], v_start=1)
        patch = extend_patch(build_equation(src, delta=0), cross, ParameterSequence(F(2), F(-3)))
        if any(r != 0 for r in apply_point_map(dst, patch).residuals().values()):
            problems.append(f"{src} patch does not map to {dst}")
    took = time.perf_counter() - start
    if took >= 5:
        problems.append(f"took {took:.1f} s >= 5 s")
    return "9 equations x 2 checks x 20 samples"


@criterion(2, "consistency around the cube")
def test_cube(problems):
    for name in EXACT:
        _expect(problems, name, check_cube_consistency(_eq(name), samples=10, rng=random.Random(f"2:{name}")))
    _expect(problems, "Q4", check_cube_consistency(_eq("Q4"), samples=5, rng=random.Random("2:Q4")))
    r = cube_routes(build_equation("H1"), F(0), F(1), F(2), F(4), F(1), F(2), F(3))
    if r["u111"] != (F(-2), F(-2), F(-2)):
        problems.append(f"H1 worked example gave {r['u111']}")
    return "H1 example u111 = -2 by all three routes"


@criterion(3, "Lax compatibility and off-shell controls")
def test_lax(problems):
    for name in SEVEN:
        eq = _eq(name)
        _expect(problems, name, check_lax_compatibility(eq, samples=5, rng=random.Random(f"3:{name}")))
        off = check_lax_compatibility(eq, samples=5, rng=random.Random(f"3off:{name}"), on_shell=False)
        _expect(problems, f"{name} off-shell", off, FAIL)
    return "7 equations, 7 controls rejected"


@criterion(4, "coefficients read from h match the table")
def test_ydkn_table(problems):
    for name in SEVEN:
        _expect(problems, name, check_ydkn_table(_eq(name), rng=random.Random(f"4:{name}")))


@criterion(5, "three-point symmetry compatibility, autonomous and non-autonomous")
def test_three_point(problems):
    betas = (1, 2, 3, 5)
    for name in SEVEN:
        eq = _eq(name)
        n = 10
        _expect(problems, name, check_three_point_compatibility(eq, samples=n, rng=random.Random(f"5:{name}")))
        try:
            rep = check_three_point_compatibility(eq, betas=betas, samples=n, rng=random.Random(f"5na:{name}"))
            _expect(problems, f"{name} betas={betas}", rep)
        except Exception as exc:
            problems.append(f"{name} betas={betas} {type(exc).__name__}: {exc}{_factor_note(name, betas)}")


def _factor_note(name, betas):
    """Explain a row on which the equation splits into factors and cannot be solved for u11."""
    if name not in O.EQUATIONS:
        return ""
    for b in betas:
        E = O.EQUATIONS[name].subs({O.be: b, O.de: 1})
        factors = [f for f, _ in sp.factor_list(sp.numer(sp.together(E)))[1] if f.has(O.u11)]
        if len(factors) == 1 and sp.degree(factors[0], O.u11) == 1 and not factors[0].has(O.u00):
            return f" (at beta = {b}, E = {sp.factor(E)})"
    return ""


@criterion(6, "tau system, f1 routes, five-point compatibility and commutativity")
def test_master_symmetry(problems):
    alpha = F(7, 3)
    for name, want in (("H1", 0), ("H2", -2), ("H3", 2 * alpha)):
        coeffs = ydkn_table(name, alpha)
        rates = tau_derivative(coeffs).rates
        c_tau = [sp.sympify(c).subs({O.al: O.to_sympy(alpha), O.de: 1}) for c in O.C_TAU[name]]
        closed = tuple(O.to_fraction(sp.diff(c, O.TAU).subs(O.TAU, 0)) for c in c_tau)
        if (rates.c4, rates.c5, rates.c6) != closed or rates.c6 != want:
            problems.append(f"{name} tau rates {rates.as_tuple()}")
    for name in SEVEN:
        eq = _eq(name)
        rng = random.Random(f"6:{name}")
        (a,) = eq.draw_params(rng, 1)
        flow = table_flow(eq)(a)
        _expect(problems, f"{name} f1 routes", check_f1_routes(flow, samples=10, rng=rng))
        k = 3 if name == "Q4" else 10
        _expect(problems, f"{name} 5pt", check_five_point_compatibility(eq, samples=k, rng=rng))
        _expect(problems, f"{name} commutator", check_flow_commutativity(flow, samples=k, rng=rng))
    return "c6-dot = 0, -2, 2 alpha delta"


@criterion(7, "Miura map, round trip and Volterra push-forward")
def test_miura(problems):
    for name in MIURA_NAMES:
        eq = _eq(name)
        _expect(problems, f"{name} greece2", check_greece2(eq, rng=random.Random(f"7:{name}")))
        rep = check_miura_roundtrip(eq, sites=20, rng=random.Random(f"7rt:{name}"))
        _expect(problems, f"{name} round trip", rep)
    flat = [n for n in SEVEN if n != "Q4" and ydkn_table(n, F(2)).c1 == ydkn_table(n, F(2)).c2 == 0]
    if sorted(flat) != sorted(MIURA_NAMES):
        problems.append(f"c1 = c2 = 0 flows are {flat}")
    for name in flat:
        rep = volterra_pushforward_check(YdKNFlow(ydkn_table(name, F(3))), rng=random.Random(f"7v:{name}"))
        _expect(problems, f"{name} Volterra", rep)
    try:
        volterra_pushforward_check(YdKNFlow(ydkn_table("Q4", CurvePoint(F(1), F(1), F(1), F(2)))))
        problems.append("Q4 flow was not rejected")
    except NotApplicable:
        pass
    h1 = build_equation("H1")
    u = {n: F(n) for n in range(-3, 24)}
    v = potential_v(h1, u, 3)
    if set(v.v.values()) != {F(1, 4)}:
        problems.append("H1 v is not 1/4")
    if recurrence_residual(h1, u, v, 0) != u[2] - 2 * u[0] + u[-2]:
        problems.append("H1 recurrence differs")
    return "H1 v = 1/4 on u_n = n"


@criterion(8, "Schroedinger reduction in the tower field")
def test_schroedinger(problems):
    for name in EXACT:
        _expect(problems, name, check_schroedinger_reduction(_eq(name), samples=3, rng=random.Random(f"8:{name}")))


@criterion(9, "H3 Baecklund simulation, RK4 order and perturbed control")
def test_simulation(problems):
    seed_state = period_four_seed(16, 2.0)
    h3 = build_equation("H3")
    cfg = SimConfig(N=16, h=1e-3, horizon=1.0, alpha=2.0, beta0=3.0)
    start = time.perf_counter()
    seed = simulate_seed(h3, seed_state, cfg)
    row = backlund_extend(h3, seed, 3.0, 0.7, cfg)
    took = time.perf_counter() - start
    res = max_residual(row)
    if not res < 1e-6:
        problems.append(f"max |Xi| = {res:.2e}")
    if took >= 10:
        problems.append(f"took {took:.1f} s")
    ratio = self_convergence_ratio(seed.flow, seed_state, SimConfig(N=16, h=0.02, horizon=1.0, alpha=2.0), h3)
    if not 8 <= ratio <= 32:
        problems.append(f"RK4 ratio {ratio:.2f}")
    ctl = SimConfig(N=16, h=1e-3, horizon=1.0, alpha=2.0, beta0=5.0)
    mu0, _ = max(monodromy_fixed_points(h3, seed_state, 2.0, 5.0, 1, 4), key=lambda p: abs(p[1]))
    pert = backlund_extend(h3, simulate_seed(h3, seed_state, ctl), 5.0, mu0, ctl, perturbation=1e-6)
    prof = residual_profile(pert)
    values = [prof[n] for n in sorted(prof)]
    if not all(b > a for a, b in zip(values, values[1:])):
        problems.append("perturbed residual is not monotone in n")
    return f"max |Xi| = {res:.1e}, ratio {ratio:.2f}, control {values[0]:.0e} -> {values[-1]:.0e}"


@criterion(10, "planted defects are caught in every family")
def test_mutation_coverage(problems):
    outcomes = mutation_coverage()
    table = coverage_table(outcomes)
    for key, ok in table.items():
        if not ok:
            problems.append(f"{key} survived")
    for family in FAMILIES:
        for check in CHECKS:
            if (family, check) not in table and not (family == "A" and check in _A_FREE):
                problems.append(f"no mutant for {check} in family {family}")
    again = coverage_table(mutation_coverage())
    if again != table:
        problems.append("coverage is not reproducible")
    return f"{sum(o.killed for o in outcomes)}/{len(outcomes)} mutants killed"


# checks with no A-list data: Lax, Miura and the table-based flows
_A_FREE = {"lax", "miura", "schroedinger", "volterra", "greece2"}


if __name__ == "__main__":
    exit_code = 0
    for test in [v for k, v in sorted(globals().items()) if k.startswith("test_")]:
        try:
            test()
        except AssertionError:
            exit_code = 1
    sys.exit(exit_code)

"""Planted defects for every check of the battery.

Each :class:`Mutant` runs one check on a deliberately broken input.  A
healthy battery reports FAIL, and the failing sample replays to a nonzero
discrepancy.  ``mutation_coverage`` runs every applicable mutant against
a set of equations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .catalog import BETA, CATALOG, LAX_NAMES, U00, U01, U10, QuadEquation, build_equation, lax_data
from .checks import check_affine_linear, check_cube_consistency, check_lax_compatibility, check_square_symmetry
from .miura import (
    MIURA_NAMES,
    check_greece2,
    check_miura_roundtrip,
    check_schroedinger_reduction,
    volterra_pushforward_check,
)
from .sampling import CheckReport, is_nonzero_discrepancy
from .symmetry import (
    YdKNFlow,
    check_f1_routes,
    check_five_point_compatibility,
    check_flow_commutativity,
    check_iden,
    check_three_point_compatibility,
    check_ydkn_table,
    default_flow,
    table_flow,
)

FAMILIES = {"H": ("H1", "H2", "H3"), "Q": ("Q1", "Q2", "Q3", "Q4"), "A": ("A1", "A2")}


def family_of(name: str) -> str:
    for fam, names in FAMILIES.items():
        if name in names:
            return fam
    raise KeyError(name)


# defective ingredients --------------------------------------------------------


def bump_c5(coeffs):
    """c5 + 1: breaks proportionality with every listed coefficient set."""
    c = list(coeffs)
    c[4] = c[4] + 1
    return type(coeffs)(*c)


def bumped_flow(eq: QuadEquation) -> Callable:
    make = default_flow(eq)
    return lambda alpha, beta=None: YdKNFlow(bump_c5(make(alpha, beta).coeffs))


@dataclass(frozen=True)
class FlippedF1Flow(YdKNFlow):
    """f1 with the sign of its calR term reversed."""

    def f1(self, um2, um1, u0, u1, u2, calR_sign=1):
        return YdKNFlow.f1(self, um2, um1, u0, u1, u2, calR_sign=-calR_sign)


@dataclass(frozen=True)
class ShiftedF1Flow(YdKNFlow):
    """f1 + u0.  Unlike the calR sign this also breaks flows whose calR
    vanishes (H1), and u0 is not a symmetry of any catalog equation."""

    def f1(self, um2, um1, u0, u1, u2, calR_sign=1):
        return YdKNFlow.f1(self, um2, um1, u0, u1, u2, calR_sign=calR_sign) + u0


@dataclass(frozen=True)
class DilatingFlow(YdKNFlow):
    """The YdKN right-hand side plus u0 (a constant drift would be invisible
    to translation-invariant Volterra variables)."""

    def rhs(self, um1, u0, u1):
        return YdKNFlow.rhs(self, um1, u0, u1) + u0


def _flow_at(eq, rng):
    alpha, beta = eq.draw_params(rng, 2)
    return default_flow(eq)(alpha, beta)


def _wrong_lax_entry(eq):
    lax = lax_data(eq)
    e = list(lax.entries)
    e[1] = e[1] + U00
    return lax.with_entries(e)


def _wrong_rho(eq):
    lax = lax_data(eq)
    return lax.with_rho(lax.rho + U10 * U10)


def _iden_mutant(eq, rng):
    fl = _flow_at(eq, rng)
    return check_iden(fl, samples=5, rng=rng, r=lambda x, y: fl.r(x, y) + x)


def _commutator_mutant(eq, rng, cls=FlippedF1Flow):
    fl = _flow_at(eq, rng)
    return check_flow_commutativity(fl, cls(fl.coeffs), samples=3, rng=rng)


def _shifted(eq):
    make = default_flow(eq)
    return lambda alpha, beta=None: ShiftedF1Flow(make(alpha, beta).coeffs)


# mutants ------------------------------------------------------------------------


@dataclass(frozen=True)
class Mutant:
    check: str
    name: str
    description: str
    run: Callable[[QuadEquation, random.Random], CheckReport]
    applies: Callable[[QuadEquation], bool] = lambda eq: True


def _lax_ok(eq):
    return eq.name in LAX_NAMES


def _miura_ok(eq):
    return eq.name in MIURA_NAMES


MUTANTS = (
    Mutant(
        "affine",
        "square-term",
        "E + u00^2",
        lambda eq, r: check_affine_linear(eq.with_expr(eq.expr + U00 * U00), samples=5, rng=r),
    ),
    Mutant(
        "square-symmetry",
        "one-corner-term",
        "E + u10",
        lambda eq, r: check_square_symmetry(eq.with_expr(eq.expr + U10), samples=5, rng=r),
    ),
    Mutant(
        "cube",
        "beta-sign",
        "E with beta replaced by -beta",
        lambda eq, r: check_cube_consistency(eq.with_expr(eq.expr.subs({"beta": -BETA})), samples=5, rng=r),
        lambda eq: not eq.elliptic,
    ),
    Mutant(
        "cube",
        "extra-term",
        "E + u00 u01",
        lambda eq, r: check_cube_consistency(eq.with_expr(eq.expr + U00 * U01), samples=3, rng=r),
    ),
    Mutant(
        "lax",
        "off-shell",
        "u11 drawn at random instead of solving E = 0",
        lambda eq, r: check_lax_compatibility(eq, samples=5, rng=r, on_shell=False),
        _lax_ok,
    ),
    Mutant(
        "lax",
        "wrong-entry",
        "L[0][1] + u00",
        lambda eq, r: check_lax_compatibility(eq, samples=5, rng=r, lax=_wrong_lax_entry(eq)),
        _lax_ok,
    ),
    Mutant(
        "h-extract",
        "bumped-reference",
        "reference coefficients with c5 + 1",
        lambda eq, r: check_ydkn_table(eq, samples=5, rng=r, table=bumped_flow(eq)),
    ),
    Mutant(
        "3pt",
        "bumped-flow",
        "YdKN flow with c5 + 1",
        lambda eq, r: check_three_point_compatibility(eq, flow=bumped_flow(eq), samples=3, rng=r),
    ),
    Mutant(
        "3pt-m",
        "bumped-flow",
        "m-direction YdKN flow with c5 + 1",
        lambda eq, r: check_three_point_compatibility(
            eq, flow=bumped_flow(eq.transposed()), direction="m", samples=3, rng=r
        ),
    ),
    Mutant(
        "3pt-nonautonomous",
        "bumped-flow",
        "YdKN flow with c5 + 1, beta_m = 2, 3, 5, 7",
        lambda eq, r: check_three_point_compatibility(
            eq, flow=bumped_flow(eq), betas=(2, 3, 5, 7), samples=2, rng=r
        ),
        lambda eq: not eq.elliptic or eq.free_curve,
    ),
    Mutant(
        "5pt",
        "calR-sign",
        "f1 with the calR term negated",
        lambda eq, r: check_five_point_compatibility(eq, samples=3, rng=r, calR_sign=-1),
    ),
    Mutant(
        "5pt",
        "plus-u0",
        "f1 + u0",
        lambda eq, r: check_five_point_compatibility(eq, flow=_shifted(eq), samples=3, rng=r),
    ),
    Mutant(
        "iden",
        "shifted-r",
        "r(x, y) + x",
        lambda eq, r: _iden_mutant(eq, r),
    ),
    Mutant(
        "f1-routes",
        "calR-sign",
        "closed-form f1 with the calR term negated",
        lambda eq, r: check_f1_routes(FlippedF1Flow(_flow_at(eq, r).coeffs), samples=5, rng=r),
    ),
    Mutant(
        "f1-routes",
        "plus-u0",
        "closed-form f1 + u0",
        lambda eq, r: check_f1_routes(ShiftedF1Flow(_flow_at(eq, r).coeffs), samples=5, rng=r),
    ),
    Mutant(
        "commutator",
        "calR-sign",
        "f1 with the calR term negated",
        lambda eq, r: _commutator_mutant(eq, r),
    ),
    Mutant(
        "commutator",
        "plus-u0",
        "f1 + u0",
        lambda eq, r: _commutator_mutant(eq, r, ShiftedF1Flow),
    ),
    Mutant(
        "miura",
        "wrong-rho",
        "v built from rho + u10^2",
        lambda eq, r: check_miura_roundtrip(eq, samples=2, rng=r, lax=_wrong_rho(eq)),
        _miura_ok,
    ),
    Mutant(
        "schroedinger",
        "mu-power",
        "chi scaled by mu^n instead of mu^(n/2)",
        lambda eq, r: check_schroedinger_reduction(eq, samples=3, rng=r, mu_exponent=1),
        _miura_ok,
    ),
    Mutant(
        "volterra",
        "dilating-flow",
        "YdKN right-hand side + u0",
        lambda eq, r: volterra_pushforward_check(DilatingFlow(table_flow(eq)(*eq.draw_params(r, 1)).coeffs), rng=r),
        _miura_ok,
    ),
    Mutant(
        "greece2",
        "wrong-rho",
        "rho + u10^2",
        lambda eq, r: check_greece2(eq, samples=5, rng=r, lax=_wrong_rho(eq)),
        _miura_ok,
    ),
)

CHECKS = tuple(dict.fromkeys(m.check for m in MUTANTS))


def mutant_rng(seed: int, eq_name: str, mutant: Mutant) -> random.Random:
    return random.Random(f"{seed}:{eq_name}:{mutant.check}:{mutant.name}")


@dataclass
class MutantOutcome:
    equation: str
    check: str
    mutant: str
    report: CheckReport
    replayed: object = None

    @property
    def killed(self) -> bool:
        """FAIL with a witness whose replay is again nonzero."""
        return (
            self.report.failed
            and self.report.witness is not None
            and self.replayed is not None
            and is_nonzero_discrepancy(self.replayed)
        )


def run_mutant(mutant: Mutant, eq: QuadEquation, seed: int = 0) -> MutantOutcome:
    rep = mutant.run(eq, mutant_rng(seed, eq.name, mutant))
    replayed = rep.replay() if rep.failed and rep.replay is not None else None
    return MutantOutcome(eq.name, mutant.check, mutant.name, rep, replayed)


def default_equations() -> list:
    """Every catalog equation; Q4 on a free curve (fewest square roots)."""
    return [build_equation(n, free_curve=True) if n == "Q4" else build_equation(n) for n in CATALOG]


def mutation_coverage(equations=None, seed: int = 0, mutants=MUTANTS) -> list:
    """All applicable mutants on all equations, as a list of outcomes."""
    out = []
    for eq in equations or default_equations():
        for m in mutants:
            if m.applies(eq):
                out.append(run_mutant(m, eq, seed))
    return out


def coverage_table(outcomes) -> dict:
    """{(family, check): killed by at least one mutant on every equation of the family present}."""
    by_eq = {}
    for o in outcomes:
        by_eq.setdefault((o.equation, o.check), []).append(o.killed)
    table = {}
    for (name, check), kills in by_eq.items():
        key = (family_of(name), check)
        table[key] = table.get(key, True) and any(kills)
    return table

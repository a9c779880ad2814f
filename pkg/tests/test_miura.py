"""Miura map to the discrete Schroedinger problem, its inversion and the Volterra map."""

import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from abslab.catalog import CurvePoint, build_equation, lax_data, ydkn_table
from abslab.errors import DegenerateStencil, InsufficientSeeds, NotApplicable
from abslab.miura import (
    MIURA_NAMES,
    SchroedingerPotential,
    check_greece2,
    check_miura_roundtrip,
    check_schroedinger_reduction,
    invert_miura,
    potential_v,
    recurrence_residual,
    volterra_pushforward_check,
    volterra_variable,
)
from abslab.sampling import FAIL, PASS, is_nonzero_discrepancy
from abslab.symmetry import YdKNFlow
from conftest import fractions

F = Fraction
INTEGERS = {n: F(n) for n in range(-3, 24)}


def _confirmed_fail(rep):
    assert rep.verdict == FAIL and rep.witness is not None
    assert is_nonzero_discrepancy(rep.replay())


def _oracle_v(name, u, alpha, n):
    rho = O.subs_all(O.RHO[name], {"u00": u[n], "u10": u[n + 1], "alpha": alpha, "delta": F(1)})
    return O.to_fraction(rho) / ((u[n + 1] - u[n - 1]) * (u[n + 2] - u[n]))


# potential -----------------------------------------------------------------------


def test_h1_potential_on_integers():
    v = potential_v(build_equation("H1"), INTEGERS, 3)
    assert set(v.v.values()) == {F(1, 4)}


def test_h2_potential_on_integers():
    v = potential_v(build_equation("H2"), INTEGERS, 0)
    assert all(v[n] == F(2 * n + 1, 4) for n in v.sites())


def test_constant_sequence_is_degenerate():
    with pytest.raises(DegenerateStencil):
        potential_v(build_equation("H3"), [F(2)] * 6, 1)


def test_no_miura_map_outside_the_list():
    with pytest.raises(NotApplicable):
        potential_v(build_equation("A1"), INTEGERS, 1)


@pytest.mark.parametrize("name", MIURA_NAMES)
def test_potential_matches_oracle(name):
    rng = random.Random(name)
    u = {n: F(rng.randint(-40, 40), rng.randint(1, 6)) for n in range(8)}
    alpha = F(7, 3)
    v = potential_v(build_equation(name), u, alpha)
    assert v.sites() == list(range(1, 6))
    for n in v.sites():
        assert v[n] == _oracle_v(name, u, alpha, n)


# greece2 -------------------------------------------------------------------------


def test_greece2_h2_sides_equal_two():
    lax = lax_data("H2")
    rho = lambda x, y: lax.rho_value(x, y, F(3))
    # rho = x + y + alpha, so each partial is 1 and the right side is 2 (rho0 - rho-1)/(u1 - u-1) = 2
    u = {k: F(v) for k, v in zip(range(-2, 3), (4, -1, 2, 7, 5))}
    assert 2 * (rho(u[0], u[1]) - rho(u[-1], u[0])) / (u[1] - u[-1]) == 2
    assert check_greece2(build_equation("H2"), rng=random.Random(0)).verdict == PASS


@pytest.mark.parametrize("name", MIURA_NAMES)
def test_greece2_passes(name):
    assert check_greece2(build_equation(name), rng=random.Random(name)).verdict == PASS


def test_greece2_q3_symbolic():
    """The rho identity for Q3 with delta = 1 holds as a rational function."""
    x, y, z = sp.symbols("x y z")
    rho = lambda p, q: O.RHO["Q3"].subs({O.u00: p, O.u10: q}, simultaneous=True).subs(O.de, 1)
    lhs = sp.diff(rho(y, z), z) + sp.diff(rho(x, y), x)
    rhs = 2 * (rho(y, z) - rho(x, y)) / (z - x)
    assert sp.cancel(lhs - rhs) == 0


def test_greece2_with_wrong_rho_fails():
    lax = lax_data("H2")
    from abslab.catalog import U10

    _confirmed_fail(check_greece2(build_equation("H2"), rng=random.Random(0), lax=lax.with_rho(lax.rho + U10 * U10)))


# recurrences ---------------------------------------------------------------------


def test_h1_recurrence_on_integers():
    eq = build_equation("H1")
    v = potential_v(eq, INTEGERS, 3)
    assert recurrence_residual(eq, INTEGERS, v, 5) == INTEGERS[7] - 2 * INTEGERS[5] + INTEGERS[3] == 0


@pytest.mark.parametrize("name", MIURA_NAMES)
def test_recurrence_matches_oracle(name):
    rng = random.Random(name)
    eq = build_equation(name)
    alpha = F(5, 2)
    for _ in range(3):
        u = {n: F(rng.randint(-40, 40), rng.randint(1, 6)) for n in range(-3, 5)}
        v = potential_v(eq, u, alpha)
        for n in (0, 1):
            assert recurrence_residual(eq, u, v, n) == 0
            stencil = [O.to_sympy(u[n + k]) for k in range(-2, 3)]
            want = O.recurrence(name, *stencil, O.to_sympy(v[n]), O.to_sympy(v[n - 1]), O.to_sympy(alpha))
            assert sp.simplify(want) == 0


@pytest.mark.parametrize("name", MIURA_NAMES)
def test_perturbed_potential_leaves_a_residual(name):
    rng = random.Random(name)
    eq = build_equation(name)
    u = {n: F(rng.randint(-40, 40), rng.randint(1, 6)) for n in range(-3, 5)}
    v = potential_v(eq, u, F(5, 2))
    bumped = SchroedingerPotential({**v.v, 0: v[0] + 1}, v.alpha)
    assert recurrence_residual(eq, u, bumped, 0) != 0


# inversion -------------------------------------------------------------------------


def test_h1_inversion_recovers_integers():
    v = SchroedingerPotential({n: F(1, 4) for n in range(0, 19)}, F(3))
    back = invert_miura("H1", v, {0: F(0), 1: F(1), 2: F(2), 3: F(3)}, stop=20)
    assert back == {n: F(n) for n in range(21)}


def test_zero_length_extension_returns_seeds():
    v = SchroedingerPotential({n: F(1, 4) for n in range(0, 5)}, F(3))
    seeds = {0: F(0), 1: F(1), 2: F(2), 3: F(3)}
    assert invert_miura("H1", v, seeds, stop=3) == seeds


def test_h3_round_trip_on_twenty_sites():
    rng = random.Random(3)
    eq = build_equation("H3")
    u = {n: F(rng.randint(-99, 99), rng.randint(1, 9)) for n in range(20)}
    v = potential_v(eq, u, F(4))
    back = invert_miura(eq, v, {k: u[k] for k in range(4)}, stop=19)
    assert back == u


def test_inversion_needs_seeds():
    v = SchroedingerPotential({n: F(1, 4) for n in range(0, 5)}, F(3))
    with pytest.raises(InsufficientSeeds):
        invert_miura("H1", v, {0: F(0), 1: F(1)})
    with pytest.raises(InsufficientSeeds):
        invert_miura("Q1", v, {0: F(0), 1: F(1), 2: F(2)})


@pytest.mark.parametrize("name", MIURA_NAMES)
def test_round_trip_check(name):
    assert check_miura_roundtrip(build_equation(name), rng=random.Random(name)).verdict == PASS


@settings(max_examples=25)
@given(st.lists(fractions(60), min_size=20, max_size=20, unique=True), st.sampled_from(MIURA_NAMES))
def test_round_trip_property(values, name):
    eq = build_equation(name)
    u = dict(enumerate(values))
    try:
        v = potential_v(eq, u, F(3, 2))
        if any(x == 0 for x in v.v.values()):
            return
    except DegenerateStencil:
        return
    assert invert_miura(eq, v, {k: u[k] for k in range(4)}, stop=19) == u


# Volterra --------------------------------------------------------------------------


def test_h1_volterra_variable():
    fl = YdKNFlow(ydkn_table("H1", F(2)))
    um1, u0, u1, u2 = F(1), F(3), F(-2), F(7)
    assert volterra_variable(fl, um1, u0, u1, u2) == -1 / ((u2 - u0) * (u1 - um1))


@pytest.mark.parametrize("name,alpha", [("H1", 2), ("H2", 3), ("H3", 1), ("Q1", 2), ("Q2", 3), ("Q3", 2)])
def test_volterra_pushforward(name, alpha):
    rep = volterra_pushforward_check(YdKNFlow(ydkn_table(name, F(alpha))), rng=random.Random(name))
    assert rep.verdict == PASS
    assert rep.details["sign"] == 1


def test_volterra_rejects_q4():
    p = CurvePoint(F(1), F(1), F(1), F(2))
    with pytest.raises(NotApplicable):
        volterra_pushforward_check(YdKNFlow(ydkn_table("Q4", p)))


# Schroedinger reduction ------------------------------------------------------------


def test_h1_reduction_with_rational_root():
    rep = check_schroedinger_reduction(build_equation("H1"), rng=random.Random(0), params=(3, 7))
    assert rep.verdict == PASS


def test_h1_reduction_with_adjoined_root():
    rep = check_schroedinger_reduction(build_equation("H1"), rng=random.Random(0), params=(3, 5))
    assert rep.verdict == PASS


def test_wrong_power_of_mu_fails():
    _confirmed_fail(
        check_schroedinger_reduction(build_equation("H1"), rng=random.Random(0), params=(3, 5), mu_exponent=1)
    )


@pytest.mark.parametrize("name", MIURA_NAMES)
def test_reduction_for_all_six(name):
    assert check_schroedinger_reduction(build_equation(name), rng=random.Random(name)).verdict == PASS

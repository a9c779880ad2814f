"""YdKN flows, the tau system, higher symmetries and their compatibility checks."""

import random
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from abslab.catalog import CATALOG, LAX_NAMES, CurvePoint, YdKNCoefficients, build_equation, ydkn_table
from abslab.errors import DegenerateStencil
from abslab.sampling import FAIL, PASS, is_nonzero_discrepancy
from abslab.symmetry import (
    YdKNFlow,
    check_f1_routes,
    check_five_point_compatibility,
    check_flow_commutativity,
    check_iden,
    check_three_point_compatibility,
    check_ydkn_table,
    f1_by_master_symmetry,
    f1_by_tau_route,
    f1_rhs,
    table_flow,
    tau_derivative,
    ydkn_rhs,
)
from conftest import fractions

F = Fraction


def _equation(name):
    return build_equation(name, free_curve=True) if name == "Q4" else build_equation(name)


def flow_of(name, alpha, delta=1):
    return YdKNFlow(ydkn_table(name, F(alpha), delta=F(delta)))


def _confirmed_fail(rep):
    assert rep.verdict == FAIL and rep.witness is not None
    assert is_nonzero_discrepancy(rep.replay())


Q4_ALPHA = CurvePoint(F(1), F(1), F(1), F(2))  # 4 - 1 - 2 = 1


# YdKN right-hand side ------------------------------------------------------------


def test_h1_rhs_example():
    assert ydkn_rhs(flow_of("H1", 3), F(0), F(1), F(2)) == F(1, 2)


def test_h3_rhs_example():
    assert ydkn_rhs(flow_of("H3", 1), F(0), F(1), F(2)) == 2


def test_rhs_rejects_degenerate_stencil():
    with pytest.raises(DegenerateStencil):
        ydkn_rhs(flow_of("H1", 3), F(4), F(1), F(4))


@given(st.tuples(*[fractions(50)] * 6), fractions(), fractions())
def test_polynomials_and_r_symmetry(cs, x, y):
    fl = YdKNFlow(YdKNCoefficients(*cs))
    c1, c2, c3, c4, c5, c6 = cs
    assert fl.A(x) == c1 * x * x + 2 * c2 * x + c3
    assert fl.B(x) == c2 * x * x + c4 * x + c5
    assert fl.C(x) == c3 * x * x + 2 * c5 * x + c6
    assert fl.r(x, y) == fl.r(y, x)
    assert fl.r(x, y) == fl.R(y, x, y)


# iden ---------------------------------------------------------------------------


def test_iden_h2():
    assert check_iden(flow_of("H2", 5), rng=random.Random(0)).verdict == PASS


def test_iden_q4():
    fl = YdKNFlow(ydkn_table("Q4", Q4_ALPHA))
    assert fl.coeffs.c1 == 1 and fl.coeffs.c2 == -1
    assert check_iden(fl, rng=random.Random(0)).verdict == PASS


def test_iden_with_dropped_factor_fails():
    fl = flow_of("H2", 5)
    broken = lambda x, y: fl.A(x) * y * y + fl.B(x) * y + fl.C(x)  # 2 B -> B
    _confirmed_fail(check_iden(fl, rng=random.Random(0), r=broken))


# table check and three-point compatibility ---------------------------------------


@pytest.mark.parametrize("name", CATALOG)
def test_extracted_coefficients_match_table(name):
    rep = check_ydkn_table(_equation(name), rng=random.Random(name))
    assert rep.verdict == PASS


@pytest.mark.parametrize("name", CATALOG)
def test_three_point_compatibility(name):
    rep = check_three_point_compatibility(_equation(name), samples=4, rng=random.Random(name))
    assert rep.verdict == PASS


@pytest.mark.parametrize("name", CATALOG)
def test_three_point_compatibility_m_direction(name):
    rep = check_three_point_compatibility(_equation(name), direction="m", samples=3, rng=random.Random(name))
    assert rep.verdict == PASS


@pytest.mark.parametrize("name", ["H1", "H2", "H3", "Q1", "Q2", "Q3", "Q4", "A1"])
def test_three_point_nonautonomous_rows(name):
    rep = check_three_point_compatibility(_equation(name), betas=(2, 3, 5, 7), samples=2, rng=random.Random(name))
    assert rep.verdict == PASS
    assert rep.details["betas"] == [2, 3, 5, 7]


def test_h3_with_h2_coefficients_fails():
    h3 = build_equation("H3")
    h2_flow = table_flow(build_equation("H2"))
    _confirmed_fail(check_three_point_compatibility(h3, flow=h2_flow, samples=3, rng=random.Random(0)))


# tau system ----------------------------------------------------------------------


def _sympy_tau_rates(cs):
    """c-dot read off (r r_xy - r_x r_y)/2 with sympy."""
    x, y = sp.symbols("x y")
    c1, c2, c3, c4, c5, c6 = (O.to_sympy(F(c)) for c in cs)
    r = c1 * x**2 * y**2 + 2 * c2 * (x**2 * y + x * y**2) + c3 * (x**2 + y**2) + 2 * c4 * x * y + 2 * c5 * (x + y) + c6
    g = sp.Poly(sp.expand((r * sp.diff(r, x, y) - sp.diff(r, x) * sp.diff(r, y)) / 2), x, y).as_dict()
    at = lambda i, j: g.get((i, j), sp.Integer(0))
    return tuple(O.to_fraction(v) for v in (at(2, 2), at(2, 1) / 2, at(2, 0), at(1, 1) / 2, at(1, 0) / 2, at(0, 0)))


@pytest.mark.parametrize("name", ["H1", "H2", "H3"])
def test_tau_rates_match_closed_form_solutions(name):
    alpha = F(7, 3)
    coeffs = ydkn_table(name, alpha)
    c4, c5, c6 = (sp.sympify(c).subs({O.al: O.to_sympy(alpha), O.de: 1}) for c in O.C_TAU[name])
    assert (coeffs.c4, coeffs.c5, coeffs.c6) == tuple(O.to_fraction(c.subs(O.TAU, 0)) for c in (c4, c5, c6))
    rates = tau_derivative(coeffs).rates
    want = tuple(O.to_fraction(sp.diff(c, O.TAU).subs(O.TAU, 0)) for c in (c4, c5, c6))
    assert (rates.c4, rates.c5, rates.c6) == want
    assert (rates.c1, rates.c2, rates.c3) == (0, 0, 0)


def test_tau_examples():
    assert tau_derivative(ydkn_table("H2", F(5))).rates.c6 == -2
    assert all(c == 0 for c in tau_derivative(ydkn_table("H1", F(5))).rates)
    assert tau_derivative(ydkn_table("H3", F(5))).rates.c6 == 10


@settings(max_examples=40)
@given(st.tuples(*[fractions(30)] * 6))
def test_tau_derivative_matches_sympy(cs):
    assert tau_derivative(YdKNCoefficients(*cs)).rates.as_tuple() == _sympy_tau_rates(cs)


@given(fractions(), fractions(), fractions())
def test_tau_system_for_the_h_list(c4, c5, c6):
    rates = tau_derivative(YdKNCoefficients(0, 0, 0, c4, c5, c6)).rates
    assert rates.as_tuple() == (0, 0, 0, 0, 0, c4 * c6 - 2 * c5 * c5)


# f1 ------------------------------------------------------------------------------


def test_h1_f1_on_integers():
    fl = flow_of("H1", 3)
    u = [F(n) for n in range(-2, 3)]
    assert fl.calR(u[3], u[2], u[1]) == 0
    assert f1_rhs(fl, *u) == F(-1, 4)


def test_h2_f1_on_integers():
    fl = flow_of("H2", 0)
    u = [F(n) for n in range(-2, 3)]
    assert fl.calR(u[3], u[2], u[1]) == -2
    assert fl.r(u[2], u[1]) == 2 * (u[2] + u[1])
    # r0 = 2(0 - 1) = -2, r1 = 2(1 + 0) = 2; on u_n = n, f0_n = 4n / 2 = 2n
    fp, fm = fl.rhs(u[2], u[3], u[4]), fl.rhs(u[0], u[1], u[2])
    assert (fp, fm) == (2, -2)
    assert f1_rhs(fl, *u) == F(-2, 2) - (-2 * fp + 2 * fm) / 4


def test_f1_rejects_degenerate_stencil():
    with pytest.raises(DegenerateStencil):
        f1_rhs(flow_of("H1", 3), F(0), F(1), F(2), F(3), F(2))


@pytest.mark.parametrize("name,alpha,delta,want", [("H1", 3, 1, 0), ("H2", 3, 1, -2), ("H3", 3, 2, 12)])
def test_calR_for_the_h_list(name, alpha, delta, want):
    """calR is 0, -2 and 2 alpha delta for H1, H2, H3."""
    fl = flow_of(name, alpha, delta)
    for u in [(F(1), F(2), F(5)), (F(-3), F(7, 2), F(0))]:
        assert fl.calR(*u) == want


def test_calR_is_dtau_of_R():
    fl = flow_of("Q2", F(3, 2))
    rates = YdKNFlow(tau_derivative(fl.coeffs).rates)
    u1, u0, um1 = F(2), F(-1, 3), F(5)
    assert fl.calR(u1, u0, um1) == rates.R(u1, u0, um1)


@pytest.mark.parametrize("name", LAX_NAMES)
def test_f1_routes_agree(name):
    eq = _equation(name)
    rng = random.Random(name)
    (alpha,) = eq.draw_params(rng, 1)
    fl = table_flow(eq)(alpha)
    assert check_f1_routes(fl, samples=5, rng=rng).verdict == PASS


def test_f1_routes_by_hand():
    fl = flow_of("Q3", F(2, 5))
    v = [F(3), F(-1), F(2, 7), F(5), F(-4)]
    closed = f1_rhs(fl, *v)
    assert f1_by_tau_route(fl, *v) == closed
    assert f1_by_master_symmetry(fl, {10 + k: v[k] for k in range(5)}, 12) == closed


@pytest.mark.parametrize("name", CATALOG)
def test_five_point_compatibility(name):
    rep = check_five_point_compatibility(_equation(name), samples=3, rng=random.Random(name))
    assert rep.verdict == PASS


@pytest.mark.parametrize("name", ["H2", "H3", "Q1"])
def test_five_point_with_flipped_calR_fails(name):
    _confirmed_fail(check_five_point_compatibility(build_equation(name), samples=3, rng=random.Random(0), calR_sign=-1))


# commutator ----------------------------------------------------------------------


@pytest.mark.parametrize("name", LAX_NAMES)
def test_flows_commute(name):
    eq = _equation(name)
    rng = random.Random(name)
    (alpha,) = eq.draw_params(rng, 1)
    assert check_flow_commutativity(table_flow(eq)(alpha), samples=3, rng=rng).verdict == PASS


def test_h3_flows_commute_at_unit_parameters():
    assert check_flow_commutativity(flow_of("H3", 1), rng=random.Random(0)).verdict == PASS


def test_mismatched_flows_do_not_commute():
    _confirmed_fail(check_flow_commutativity(flow_of("H1", 2), flow_of("H2", 2), samples=3, rng=random.Random(0)))

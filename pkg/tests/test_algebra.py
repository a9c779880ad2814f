"""Expression trees, jets and randomized identity testing."""

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from abslab.errors import DivisionByZero, MissingSymbol
from abslab.expr import Const, eval_expr, jet_eval, symbols, to_string
from abslab.field import QQ
from abslab.jet import Jet
from abslab.sampling import FAIL, PASS, identity_test
from conftest import fractions

u00, u10, u01, u11 = symbols("u00 u10 u01 u11")
al, be = symbols("alpha beta", "param")
H1 = (u00 - u11) * (u10 - u01) - al + be
POINT = dict(zip(("u00", "u10", "u01", "u11", "alpha", "beta"), map(Fraction, (0, 1, 2, 3, 1, 2))))

NAMES = ("x", "y", "z")
X = dict(zip(NAMES, symbols("x y z")))
SX = dict(zip(NAMES, sp.symbols("x y z")))


def _is_zero_const(pair):
    e, se = pair
    return se == 0 or (isinstance(e, Const) and e.value == 0)


def trees(max_leaves=12, division=False):
    """Pairs (abslab expr, sympy expr) built by the same random recipe."""
    leaf = st.one_of(
        st.sampled_from(NAMES).map(lambda n: (X[n], SX[n])),
        st.integers(-5, 5).map(lambda k: (Const(k), sp.Integer(k))),
    )

    def extend(children):
        ops = [
            st.tuples(children, children).map(lambda p: (p[0][0] + p[1][0], p[0][1] + p[1][1])),
            st.tuples(children, children).map(lambda p: (p[0][0] - p[1][0], p[0][1] - p[1][1])),
            st.tuples(children, children).map(lambda p: (p[0][0] * p[1][0], p[0][1] * p[1][1])),
            st.tuples(children, st.integers(0, 3)).map(lambda p: (p[0][0] ** p[1], p[0][1] ** p[1])),
        ]
        if division:
            nonzero = st.tuples(children, children).filter(lambda p: not _is_zero_const(p[1]))
            ops.append(nonzero.map(lambda p: (p[0][0] / p[1][0], p[0][1] / p[1][1])))
        return st.one_of(*ops)

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def env_strategy():
    return st.tuples(fractions(50), fractions(50), fractions(50)).map(lambda v: dict(zip(NAMES, v)))


def sym_value(e, env):
    return e.subs({SX[k]: sp.Rational(v.numerator, v.denominator) for k, v in env.items()})


def frac(v):
    v = sp.Rational(v)
    return Fraction(int(v.p), int(v.q))


# examples -------------------------------------------------------------------


def test_h1_value():
    assert eval_expr(H1, POINT) == 4


def test_trivial_identity_value():
    u = symbols("u")[0]
    assert (u * 0 + 1).evaluate({"u": Fraction(7)}) == 1


def test_forced_singularity():
    um1, u1 = symbols("um1 u1")
    with pytest.raises(DivisionByZero):
        (1 / (u1 - um1)).evaluate({"u1": Fraction(2), "um1": Fraction(2)})


def test_h1_partial_in_u10():
    j = jet_eval(H1, POINT, ["u10"])
    assert j.value == 4 and j.d("u10") == -3


def test_derivative_of_constant():
    assert jet_eval(Const(5) + 0 * al, {"alpha": Fraction(1)}, ["alpha"]).d("alpha") == 0


def test_power_rule():
    u = symbols("u")[0]
    assert jet_eval(u**3, {"u": Fraction(2)}, ["u"]).d("u") == 12
    assert (u**3).diff("u").evaluate({"u": Fraction(2)}) == 12


def test_missing_symbol():
    with pytest.raises(MissingSymbol):
        jet_eval(H1, {"u00": Fraction(0)}, ["u10"])


def test_compiled_matches_tree():
    fn = H1.compile()
    assert fn(**POINT) == 4
    assert set(fn.argnames) == set(POINT)


def test_jets_over_tower_elements():
    t = QQ.adjoin(2)
    r = t.gen()
    j = Jet.variable(r, "x") * Jet.variable(r, "x") + 1
    assert j.value == 3 and j.d("x") == 2 * r


def test_subs_and_printing():
    e = H1.subs({"u11": u00})
    assert e.evaluate(POINT) == -POINT["alpha"] + POINT["beta"]
    assert "u00" in to_string(H1) and "alpha" in to_string(H1)


def test_identity_test_examples():
    u = symbols("u")[0]
    ok = identity_test((u + 1) ** 2, u**2 + 2 * u + 1, samples=5, rng=1)
    assert ok.verdict == PASS and ok.samples == 5
    bad = identity_test((u + 1) ** 2, u**2 + 2 * u + 2, samples=5, rng=1)
    assert bad.verdict == FAIL
    assert bad.witness is not None and bad.replay() == bad.discrepancy == -1


# properties -----------------------------------------------------------------


@settings(max_examples=60)
@given(trees(), env_strategy())
def test_evaluation_matches_sympy(pair, env):
    e, s = pair
    assert e.evaluate(env) == frac(sym_value(s, env))
    assert e.compile()(**{k: env[k] for k in e.compile().argnames}) == e.evaluate(env)


@settings(max_examples=60)
@given(trees(), env_strategy(), st.sampled_from(NAMES))
def test_jets_are_exact_on_polynomials(pair, env, name):
    e, s = pair
    want = frac(sym_value(sp.diff(s, SX[name]), env))
    assert jet_eval(e, env, [name]).d(name) == want
    assert e.diff(name).evaluate(env) == want


@settings(max_examples=60)
@given(trees(max_leaves=8, division=True), env_strategy(), st.sampled_from(NAMES))
def test_jets_match_finite_differences(pair, env, name):
    """First-order agreement with a central difference on rational functions."""
    e, s = pair
    try:
        j = jet_eval(e, env, [name])
        eps = Fraction(1, 10**8)
        up = e.evaluate({**env, name: env[name] + eps})
        down = e.evaluate({**env, name: env[name] - eps})
    except ZeroDivisionError:
        return
    fd = (up - down) / (2 * eps)
    scale = 1 + abs(j.d(name)) + abs(fd)
    assert abs(fd - j.d(name)) / scale < Fraction(1, 10**4)


@settings(max_examples=40)
@given(
    st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)), max_size=4),
    st.integers(1, 2),
)
def test_identity_test_never_fails_on_equal_polynomials(terms, k):
    """A product of sums against its sympy expansion, total degree <= 8."""
    x, y, z = X["x"], X["y"], X["z"]
    base = Const(1)
    sbase = sp.Integer(1)
    for c, i, j, l in terms:
        base = base + Const(c) * x**i * y**j * z**l
        sbase = sbase + c * SX["x"] ** i * SX["y"] ** j * SX["z"] ** l
    lhs = base**k
    expanded = sp.Poly(sp.expand(sbase**k), *SX.values())
    rhs = Const(0)
    for (i, j, l), c in expanded.terms():
        rhs = rhs + Const(Fraction(int(c.p), int(c.q))) * x**i * y**j * z**l
    assert identity_test(lhs, rhs, free=NAMES, samples=8, rng=0).verdict == PASS

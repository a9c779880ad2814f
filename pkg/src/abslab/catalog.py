"""The ABS quad equations with their Lax data, biquadratics and YdKN tables.

Lattice parameters are passed around as plain exact scalars, except for Q4
where each parameter is a :class:`CurvePoint` ``(x, y)`` on the Weierstrass
cubic ``y**2 = 4x**3 - g2*x - g3``.  ``QuadEquation.env`` turns a parameter
pair into the symbol assignment the expression trees expect.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from .errors import (
    AbslabError,
    DegenerateSample,
    MissingParameter,
    NotApplicable,
    NotBiquadratic,
    UnknownEquation,
    ZeroValueInA2Map,
)
from .expr import Expr, ONE, param, surd, symbols, var
from .field import QQ, Tower, is_zero, to_json_value
from .sampling import DEFAULT_BOUND, make_rng, rand_distinct, rand_nonzero, rand_rational

U00, U10, U01, U11 = symbols("u00 u10 u01 u11")
ALPHA, BETA, DELTA, G2, G3, LAM = symbols("alpha beta delta g2 g3 lam", "param")
SA, SB, SC = symbols("a b c", "surd")
X, Y = U00, U10

CORNERS = ("u00", "u10", "u01", "u11")
CATALOG = ("H1", "H2", "H3", "Q1", "Q2", "Q3", "Q4", "A1", "A2")
LAX_NAMES = ("H1", "H2", "H3", "Q1", "Q2", "Q3", "Q4")
USES_DELTA = frozenset({"H3", "Q1", "Q3", "A1"})


def _exact(x):
    return Fraction(x) if type(x) is int else x


# Weierstrass parameters ------------------------------------------------


def weierstrass_r(x, g2, g3):
    return 4 * x**3 - g2 * x - g3


@dataclass(frozen=True)
class CurvePoint:
    """A Q4 lattice parameter: ``y**2 = 4x**3 - g2*x - g3`` exactly."""

    x: object
    y: object
    g2: object
    g3: object

    def __post_init__(self):
        if self.y * self.y != weierstrass_r(self.x, self.g2, self.g3):
            raise ValueError("point is not on the Weierstrass cubic")

    def to_json(self):
        return {"x": to_json_value(self.x), "y": to_json_value(self.y)}


def draw_curve_points(rng, k, g2=None, g3=None, bound=DEFAULT_BOUND, tower: Tower = QQ, xs=None):
    """``k`` points with distinct x on one cubic.

    With ``g2, g3`` unset the first two points get random rational y and the
    curve is solved for; every further y is a square root, adjoined to the
    tower when it is not already there.  ``xs`` fixes the x-coordinates.
    """
    if xs is None:
        xs = rand_distinct(rng, k, bound)
    else:
        xs = [Fraction(x) for x in xs]
        k = len(xs)
    ys = []
    if g2 is None or g3 is None:
        if k == 1:
            y0 = rand_nonzero(rng, bound)
            g2 = rand_rational(rng, bound)
            g3 = 4 * xs[0] ** 3 - g2 * xs[0] - y0 * y0
            ys = [y0]
        else:
            y0, y1 = rand_nonzero(rng, bound), rand_nonzero(rng, bound)
            x0, x1 = xs[0], xs[1]
            g2 = (4 * (x0**3 - x1**3) - (y0 * y0 - y1 * y1)) / (x0 - x1)
            g3 = 4 * x0**3 - g2 * x0 - y0 * y0
            ys = [y0, y1]
    for x in xs[len(ys):]:
        tower, y = tower.sqrt_or_adjoin(weierstrass_r(x, g2, g3), name=f"s{tower.depth}")
        ys.append(y)
    if not all(ys):
        raise DegenerateSample("surd vanished at a sampled parameter")
    return [CurvePoint(x, y, g2, g3) for x, y in zip(xs, ys)]


def q4_coefficients(al, a, be, b, g2, g3):
    """a0, a1, a2, bar a2, tilde a2, a3, a4 as functions of (alpha, a), (beta, b)."""
    a0 = a + b
    a1 = -a * be - b * al
    a2 = a * be**2 + b * al**2
    ab2 = a * b * (a + b) / (2 * (al - be)) + a * be**2 - (2 * al**2 - g2 / 4) * b
    at2 = a * b * (a + b) / (2 * (be - al)) + b * al**2 - (2 * be**2 - g2 / 4) * a
    a3 = g3 / 2 * a0 - g2 / 4 * a1
    a4 = g2**2 / 16 * a0 - g3 * a1
    return {"a0": a0, "a1": a1, "a2": a2, "abar2": ab2, "atilde2": at2, "a3": a3, "a4": a4}


# equation expressions --------------------------------------------------


def _q4_expr(c):
    u00, u10, u01, u11 = U00, U10, U01, U11
    return (
        c["a0"] * u00 * u10 * u01 * u11
        + c["a1"] * (u00 * u10 * u01 + u10 * u01 * u11 + u01 * u11 * u00 + u11 * u00 * u10)
        + c["a2"] * (u00 * u11 + u10 * u01)
        + c["abar2"] * (u00 * u10 + u01 * u11)
        + c["atilde2"] * (u00 * u01 + u10 * u11)
        + c["a3"] * (u00 + u10 + u01 + u11)
        + c["a4"]
    )


def _equation_expr(name: str) -> Expr:
    u00, u10, u01, u11 = U00, U10, U01, U11
    al, be, de = ALPHA, BETA, DELTA
    if name == "H1":
        return (u00 - u11) * (u10 - u01) - al + be
    if name == "H2":
        return (u00 - u11) * (u10 - u01) + (be - al) * (u00 + u10 + u01 + u11) - al**2 + be**2
    if name == "H3":
        return al * (u00 * u10 + u01 * u11) - be * (u00 * u01 + u10 * u11) + de * (al**2 - be**2)
    if name == "Q1":
        return al * (u00 - u01) * (u10 - u11) - be * (u00 - u10) * (u01 - u11) + de**2 * al * be * (al - be)
    if name == "Q2":
        k = al * be * (al - be)
        return (
            al * (u00 - u01) * (u10 - u11)
            - be * (u00 - u10) * (u01 - u11)
            + k * (u00 + u10 + u01 + u11)
            - k * (al**2 - al * be + be**2)
        )
    if name == "Q3":
        return (
            (be**2 - al**2) * (u00 * u11 + u10 * u01)
            + be * (al**2 - 1) * (u00 * u10 + u01 * u11)
            - al * (be**2 - 1) * (u00 * u01 + u10 * u11)
            - de**2 * (al**2 - be**2) * (al**2 - 1) * (be**2 - 1) / (4 * al * be)
        )
    if name == "Q4":
        return _q4_expr(q4_coefficients(ALPHA, SA, BETA, SB, G2, G3))
    if name == "A1":
        return al * (u00 + u01) * (u11 + u10) - be * (u00 + u10) * (u11 + u01) - de**2 * al * be * (al - be)
    if name == "A2":
        return (
            (be**2 - al**2) * (u00 * u10 * u01 * u11 + 1)
            + be * (al**2 - 1) * (u00 * u01 + u10 * u11)
            - al * (be**2 - 1) * (u00 * u10 + u01 * u11)
        )
    raise UnknownEquation(name)


@dataclass(frozen=True, eq=False)
class QuadEquation:
    """An affine-linear quad equation E(u00, u10, u01, u11; alpha, beta) = 0."""

    name: str
    expr: Expr
    delta: Fraction | None = None
    g2: Fraction | None = None
    g3: Fraction | None = None
    elliptic: bool = False  # parameters are CurvePoints (Q4)
    a_coeffs: dict | None = None

    @cached_property
    def fn(self):
        return self.expr.compile()

    @property
    def fixed(self) -> dict:
        out = {}
        for key in ("delta", "g2", "g3"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        return out

    @property
    def free_curve(self) -> bool:
        return self.elliptic and (self.g2 is None or self.g3 is None)

    def env(self, alpha, beta) -> dict:
        env = self.fixed
        if self.elliptic:
            if alpha.g2 != beta.g2 or alpha.g3 != beta.g3:
                raise ValueError("parameters lie on different curves")
            env.update(alpha=alpha.x, a=alpha.y, beta=beta.x, b=beta.y, g2=alpha.g2, g3=alpha.g3)
        else:
            env.update(alpha=_exact(alpha), beta=_exact(beta))
        return env

    def evaluate(self, u00, u10, u01, u11, alpha, beta):
        env = self.env(alpha, beta)
        env.update(u00=u00, u10=u10, u01=u01, u11=u11)
        return self.expr.evaluate(env)

    def corner_function(self, alpha, beta):
        """E as a positional function of the four corners at fixed parameters."""
        env = self.env(alpha, beta)
        fn = self.fn
        keep = {k: env[k] for k in fn.argnames if k not in CORNERS}
        missing = [k for k in fn.argnames if k not in CORNERS and k not in env]
        if missing:
            raise MissingParameter(", ".join(missing))
        used = [c for c in CORNERS if c in fn.argnames]

        def E(u00, u10, u01, u11):
            vals = {"u00": u00, "u10": u10, "u01": u01, "u11": u11}
            return fn(**keep, **{c: vals[c] for c in used})

        return E

    def draw_params(self, rng, k, bound=DEFAULT_BOUND, tower: Tower = QQ):
        if self.elliptic:
            return draw_curve_points(rng, k, self.g2, self.g3, bound, tower)
        return rand_distinct(rng, k, bound)

    def with_expr(self, expr: Expr, name: str | None = None) -> "QuadEquation":
        """A variant sharing parameters (used for planted defects)."""
        return replace(self, expr=expr, name=name or self.name + "*")

    def transposed(self) -> "QuadEquation":
        """E with the lattice directions exchanged: u10 <-> u01, alpha <-> beta."""
        swap = {"u10": U01, "u01": U10, "alpha": BETA, "beta": ALPHA, "a": SB, "b": SA}
        return replace(self, expr=self.expr.subs(swap), name=self.name + "^T")

    def __repr__(self):
        return f"QuadEquation({self.name})"


def build_equation(name: str, delta=None, g2=None, g3=None, free_curve: bool = False) -> QuadEquation:
    """Catalog equation by name.

    ``delta`` defaults to 1 for the equations that carry it.  Q4 needs
    ``g2, g3`` unless ``free_curve`` is set, in which case every parameter
    draw picks its own curve.
    """
    name = name.upper()
    if name not in CATALOG:
        raise UnknownEquation(name)
    expr = _equation_expr(name)
    kwargs = {}
    if name in USES_DELTA:
        kwargs["delta"] = Fraction(1) if delta is None else Fraction(delta)
    if name == "Q4":
        if (g2 is None) != (g3 is None):
            raise MissingParameter("Q4 needs both g2 and g3")
        if g2 is None and not free_curve:
            raise MissingParameter("Q4 needs g2 and g3 (or free_curve=True)")
        kwargs["elliptic"] = True
        kwargs["a_coeffs"] = q4_coefficients(ALPHA, SA, BETA, SB, G2, G3)
        if g2 is not None:
            kwargs["g2"], kwargs["g3"] = Fraction(g2), Fraction(g3)
    return QuadEquation(name, expr, **kwargs)


def user_equation(expr: Expr, delta=None, g2=None, g3=None, name="USER") -> QuadEquation:
    free = expr.free_symbols()
    unknown = free - set(CORNERS) - {"alpha", "beta", "delta", "g2", "g3"}
    if unknown:
        raise MissingParameter(f"unsupported symbols: {', '.join(sorted(unknown))}")
    kwargs = {}
    if "delta" in free:
        kwargs["delta"] = Fraction(1) if delta is None else Fraction(delta)
    for key, v in (("g2", g2), ("g3", g3)):
        if key in free:
            if v is None:
                raise MissingParameter(key)
            kwargs[key] = Fraction(v)
    return QuadEquation(name, expr, **kwargs)


# Lax data ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LaxData:
    """Entries of the unnormalized L(u00, u10; alpha, lam) with normalization data.

    ``f_norm_squared`` is stored rather than ``f`` because the Q4 entry is a
    square root; ``mu`` is None for Q4.
    """

    name: str
    entries: tuple
    rho: Expr
    f_norm_squared: Expr
    mu: Expr | None
    delta: Fraction | None = None
    g2: Fraction | None = None
    g3: Fraction | None = None
    elliptic: bool = False

    def env(self, alpha, lam) -> dict:
        env = {k: v for k, v in (("delta", self.delta), ("g2", self.g2), ("g3", self.g3)) if v is not None}
        if self.elliptic:
            env.update(alpha=alpha.x, a=alpha.y, lam=lam.x, c=lam.y, g2=alpha.g2, g3=alpha.g3)
        else:
            env.update(alpha=_exact(alpha), lam=_exact(lam))
        return env

    @cached_property
    def _fns(self):
        return tuple(e.compile() for e in self.entries)

    def matrix(self, x, y, alpha, lam):
        env = self.env(alpha, lam)
        env.update(u00=x, u10=y)
        v = [e.evaluate(env) for e in self.entries]
        return ((v[0], v[1]), (v[2], v[3]))

    def rho_value(self, x, y, alpha):
        env = self.env(alpha, alpha)
        env.update(u00=x, u10=y)
        return self.rho.evaluate(env)

    def mu_value(self, alpha, lam):
        if self.mu is None:
            raise NotApplicable(f"{self.name} has no scalar spectral factor")
        return self.mu.evaluate(self.env(alpha, lam))

    def f_squared_value(self, alpha, lam):
        return self.f_norm_squared.evaluate(self.env(alpha, lam))

    def with_entries(self, entries, name=None) -> "LaxData":
        return replace(self, entries=tuple(entries), name=name or self.name + "*")

    def with_rho(self, rho: Expr, name=None) -> "LaxData":
        return replace(self, rho=rho, name=name or self.name + "*")


def _lax_entries(name):
    x, y, a, l, d = X, Y, ALPHA, LAM, DELTA
    if name == "H1":
        return (x - y, (x - y) ** 2 + a - l, ONE, x - y)
    if name == "H2":
        return (x - y + a - l, (x - y) ** 2 + 2 * (a - l) * (x + y) + a**2 - l**2, ONE, x - y - a + l)
    if name == "H3":
        return (l * x - a * y, l * (x**2 + y**2) - 2 * a * x * y + d * (l**2 - a**2), a, a * x - l * y)
    if name == "Q1":
        # delta**2 where the table prints delta; identical for delta in {0, 1}
        return (l * (y - x), -l * (y - x) ** 2 + d**2 * a * l * (a - l), -a, l * (y - x))
    if name == "Q2":
        k = a * l * (a - l)
        return (
            l * (y - x) + k,
            -l * (y - x) ** 2 + 2 * k * (y + x) - k * (a**2 - a * l + l**2),
            -a,
            l * (y - x) - k,
        )
    if name == "Q3":
        return (
            a * (l**2 - 1) * x - (l**2 - a**2) * y,
            -l * (a**2 - 1) * x * y + d**2 * (a**2 - l**2) * (a**2 - 1) * (l**2 - 1) / (4 * a * l),
            l * (a**2 - 1),
            (l**2 - a**2) * x - a * (l**2 - 1) * y,
        )
    if name == "Q4":
        c = q4_coefficients(ALPHA, SA, LAM, SC, G2, G3)
        return (
            -c["a1"] * x * y - c["a2"] * y - c["atilde2"] * x - c["a3"],
            -c["abar2"] * x * y - c["a3"] * (x + y) - c["a4"],
            c["a0"] * x * y + c["abar2"] + c["a1"] * (x + y),
            c["a1"] * x * y + c["a2"] * x + c["atilde2"] * y + c["a3"],
        )
    raise UnknownEquation(name)


def _rho_expr(name):
    x, y, a, d = X, Y, ALPHA, DELTA
    return {
        "H1": lambda: ONE,
        "H2": lambda: x + y + a,
        "H3": lambda: x * y + d * a,
        "Q1": lambda: (y - x) ** 2 - d**2 * a**2,
        "Q2": lambda: (y - x) ** 2 - 2 * a**2 * (y + x) + a**4,
        "Q3": lambda: a * (x**2 + y**2) - (a**2 + 1) * x * y + d**2 * (a**2 - 1) ** 2 / (4 * a),
        "Q4": lambda: (x * y + a * x + a * y + G2 / 4) ** 2 - (x + y + a) * (4 * a * x * y - G3),
    }[name]()


def _f_squared_expr(name):
    a, l = ALPHA, LAM
    if name in ("H1", "H2"):
        return ONE
    if name in ("H3", "Q1", "Q2"):
        return l**2
    if name == "Q3":
        return (a * (1 - l**2)) ** 2
    s = (SA + SC) / (a - l)
    return (a - l) ** 2 * SC * (2 * SA + SC + s**3 / 4 - 3 * a * s)


def _mu_expr(name):
    a, l = ALPHA, LAM
    return {
        "H1": lambda: l - a,
        "H2": lambda: 2 * (l - a),
        "H3": lambda: (a**2 - l**2) / (a * l**2),
        "Q1": lambda: (l - a) / l,
        "Q2": lambda: (l - a) / l,
        "Q3": lambda: (a**2 - l**2) / (a**2 * (1 - l**2)),
        "Q4": lambda: None,
    }[name]()


def lax_data(name: str, delta=None, g2=None, g3=None) -> LaxData:
    if isinstance(name, QuadEquation):
        eq = name
        name, delta, g2, g3 = eq.name, eq.delta, eq.g2, eq.g3
    name = name.upper()
    if name not in LAX_NAMES:
        raise UnknownEquation(f"no Lax data for {name}")
    if name in USES_DELTA and delta is None:
        delta = Fraction(1)
    return LaxData(
        name,
        _lax_entries(name),
        _rho_expr(name),
        _f_squared_expr(name),
        _mu_expr(name),
        delta=Fraction(delta) if name in USES_DELTA else None,
        g2=None if g2 is None else Fraction(g2),
        g3=None if g3 is None else Fraction(g3),
        elliptic=name == "Q4",
    )


# YdKN coefficients ------------------------------------------------------


@dataclass(frozen=True)
class YdKNCoefficients:
    c1: object = 0
    c2: object = 0
    c3: object = 0
    c4: object = 0
    c5: object = 0
    c6: object = 0

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5, self.c6)

    def __iter__(self):
        return iter(self.as_tuple())

    def scaled(self, k) -> "YdKNCoefficients":
        return YdKNCoefficients(*(k * c for c in self))

    def first_nonzero(self) -> int:
        for i, c in enumerate(self):
            if not is_zero(c):
                return i
        raise ValueError("all coefficients vanish")

    def normalized(self, reference: "YdKNCoefficients | None" = None) -> "YdKNCoefficients":
        """Scale so the first nonzero entry equals ``reference``'s (or 1)."""
        i = self.first_nonzero()
        target = 1 if reference is None else reference.as_tuple()[i]
        if is_zero(target):
            return self
        return self.scaled(target / self.as_tuple()[i])

    def ratio_to(self, other: "YdKNCoefficients"):
        """k with self == k * other, or None if not proportional."""
        i = other.first_nonzero()
        k = self.as_tuple()[i] / other.as_tuple()[i]
        if all(a == k * b for a, b in zip(self, other)):
            return k
        return None

    @property
    def volterra_reducible(self) -> bool:
        return is_zero(self.c1) and is_zero(self.c2)

    def to_json(self):
        return {f"c{i + 1}": to_json_value(c) for i, c in enumerate(self)}


def ydkn_table(eq: QuadEquation | str, alpha, delta=None, g2=None, g3=None) -> YdKNCoefficients:
    """The listed n-direction YdKN constants for a catalog equation at ``alpha``."""
    if isinstance(eq, QuadEquation):
        name, delta, g2, g3 = eq.name, eq.delta, eq.g2, eq.g3
    else:
        name = eq.upper()
    if name in USES_DELTA and delta is None:
        delta = Fraction(1)
    if name == "Q4":
        a, g2, g3 = alpha.x, alpha.g2, alpha.g3
        return YdKNCoefficients(1, -a, a * a, g2 / 4 - a * a, a * g2 / 4 + g3 / 2, g2 * g2 / 16 + a * g3)
    a, d = alpha, delta
    table = {
        "H1": lambda: (0, 0, 0, 0, 0, 1),
        "H2": lambda: (0, 0, 0, 0, 1, 2 * a),
        "H3": lambda: (0, 0, 0, 1, 0, 2 * a * d),
        "Q1": lambda: (0, 0, -1, 1, 0, a * a * d * d),
        "Q2": lambda: (0, 0, 1, -1, -a * a, a**4),
        "Q3": lambda: (0, 0, -4 * a * a, 2 * a * (a * a + 1), 0, -((a * a - 1) ** 2) * d * d),
    }
    if name not in table:
        raise UnknownEquation(f"no YdKN table entry for {name}")
    return YdKNCoefficients(*(Fraction(c) if isinstance(c, int) else c for c in table[name]()))


# biquadratic h ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BiquadraticH:
    """h(u00, u10) = E * E_{u01 u11} - E_{u01} * E_{u11}; free of u01, u11."""

    expr: Expr
    equation: QuadEquation

    def value(self, x, y, alpha, beta):
        env = self.equation.env(alpha, beta)
        env.update(u00=x, u10=y)
        return self.expr.evaluate(env)


def h_polynomial(eq: QuadEquation) -> BiquadraticH:
    # For affine E = a + b*u01 + c*u11 + d*u01*u11 the combination is a*d - b*c,
    # so evaluating at u01 = u11 = 0 is exact and keeps the tree small.
    E = eq.expr
    d01 = E.diff("u01")
    d11 = E.diff("u11")
    h = E * d01.diff("u11") - d01 * d11
    h = h.subs({"u01": 0, "u11": 0})
    return BiquadraticH(h, eq)


def _interp3(p0, p1, pm):
    """Coefficients (k0, k1, k2) of k0 + k1 t + k2 t^2 through t = 0, 1, -1."""
    return (p0, (p1 - pm) / 2, (p1 + pm) / 2 - p0)


def biquadratic_matrix(fn, probes=((2, 3), (-3, 5), (7, -2))):
    """Coefficient matrix M[i][j] of x^i y^j for a polynomial of degree <= 2 in each.

    Raises NotBiquadratic when extra probe points disagree with the fit.
    """
    pts = (0, 1, -1)
    grid = [[fn(x, y) for y in pts] for x in pts]
    rows = [_interp3(*grid[i]) for i in range(3)]  # in y, per x sample
    M = [list(_interp3(rows[0][j], rows[1][j], rows[2][j])) for j in range(3)]
    M = [[M[j][i] for j in range(3)] for i in range(3)]  # M[i][j]: x^i y^j
    for x, y in probes:
        fit = sum(M[i][j] * x**i * y**j for i in range(3) for j in range(3))
        if fit != fn(x, y):
            raise NotBiquadratic(f"degree exceeds 2 in some argument (probe {x}, {y})")
    return M


def coefficients_from_matrix(M) -> YdKNCoefficients:
    """Read c1..c6 off r(x, y) = c1 x^2y^2 + 2c2(x^2y + xy^2) + c3(x^2 + y^2) + 2c4 xy + 2c5(x + y) + c6."""
    for i in range(3):
        for j in range(i):
            if M[i][j] != M[j][i]:
                raise NotBiquadratic("polynomial is not symmetric")
    return YdKNCoefficients(M[2][2], M[2][1] / 2, M[2][0], M[1][1] / 2, M[1][0] / 2, M[0][0])


def extract_ydkn_coefficients(h: BiquadraticH, alpha, beta, reference=None) -> YdKNCoefficients:
    """YdKN constants from h at fixed parameters, normalized against ``reference``."""
    env = h.equation.env(alpha, beta)
    fn = h.expr.compile()
    keep = {k: env[k] for k in fn.argnames if k not in ("u00", "u10")}

    def at(x, y):
        e = dict(keep)
        if "u00" in fn.argnames:
            e["u00"] = x
        if "u10" in fn.argnames:
            e["u10"] = y
        return fn(**e)

    coeffs = coefficients_from_matrix(biquadratic_matrix(at))
    if all(is_zero(c) for c in coeffs):
        raise NotBiquadratic("h vanishes identically")
    return coeffs.normalized(reference)


# point maps -----------------------------------------------------------------


def apply_point_map(name: str, patch, check: bool = True):
    """Map a Q1 (resp. Q3 with delta = 0) patch to a solution of A1 (resp. A2)."""
    from .lattice import LatticePatch

    name = name.upper()
    src = patch.equation
    if name == "A1":
        if src is not None and src.name != "Q1":
            raise NotApplicable("A1 map needs a Q1 patch")
        values = {(n, m): v if (n + m) % 2 == 0 else -v for (n, m), v in patch.values.items()}
        target = build_equation("A1", delta=src.delta if src is not None else None)
    elif name == "A2":
        if src is not None and (src.name != "Q3" or src.delta != 0):
            raise NotApplicable("A2 map needs a Q3 patch with delta = 0")
        values = {}
        for (n, m), v in patch.values.items():
            if (n + m) % 2 == 0:
                values[(n, m)] = v
            else:
                if is_zero(v):
                    raise ZeroValueInA2Map(f"zero value at site {(n, m)}")
                values[(n, m)] = 1 / v
        target = build_equation("A2")
    else:
        raise UnknownEquation(f"no point map for {name}")
    out = LatticePatch(values, patch.params, target)
    if check:
        bad = [s for s, r in out.residuals().items() if not is_zero(r)]
        if bad:
            raise AbslabError(f"mapped patch violates {name} at squares {bad}")
    return out

"""YdKN flows and generalized symmetries of quad equations.

A flow is evaluated on plain exact scalars or on Jets, so every derivative
the checks need (of the corner map xi, of f0 and f1) is exact.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .catalog import (
    CATALOG,
    QuadEquation,
    YdKNCoefficients,
    extract_ydkn_coefficients,
    h_polynomial,
    ydkn_table,
)
from .errors import DegenerateStencil, NotBiquadratic, UnknownEquation
from .field import is_zero
from .jet import Jet
from .lattice import CrossData, ParameterSequence, extend_patch, residual, solve_corner, solve_vertex
from .sampling import DEFAULT_BOUND, DEFAULT_RETRIES, CheckReport, make_rng, rand_rational, run_samples

HALF = Fraction(1, 2)


def _nonzero_gap(a, b, what="stencil"):
    d = a - b
    if is_zero(d):
        raise DegenerateStencil(f"degenerate {what}")
    return d


@dataclass(frozen=True)
class YdKNFlow:
    """du0/de = R(u1, u0, u-1) / (u1 - u-1) with R built from c1..c6."""

    coeffs: YdKNCoefficients

    # polynomials in u0 and their derivatives
    def A(self, u):
        c = self.coeffs
        return c.c1 * u * u + 2 * c.c2 * u + c.c3

    def B(self, u):
        c = self.coeffs
        return c.c2 * u * u + c.c4 * u + c.c5

    def C(self, u):
        c = self.coeffs
        return c.c3 * u * u + 2 * c.c5 * u + c.c6

    def dA(self, u):
        c = self.coeffs
        return 2 * c.c1 * u + 2 * c.c2

    def dB(self, u):
        c = self.coeffs
        return 2 * c.c2 * u + c.c4

    def dC(self, u):
        c = self.coeffs
        return 2 * c.c3 * u + 2 * c.c5

    def R(self, u1, u0, um1):
        return self.A(u0) * u1 * um1 + self.B(u0) * (u1 + um1) + self.C(u0)

    def r(self, x, y):
        """r(x, y) = R(y, x, y); symmetric biquadratic."""
        return self.A(x) * y * y + 2 * self.B(x) * y + self.C(x)

    def rhs(self, um1, u0, u1):
        return self.R(u1, u0, um1) / _nonzero_gap(u1, um1)

    def calR(self, u1, u0, um1):
        A, B, C = self.A(u0), self.B(u0), self.C(u0)
        dA, dB, dC = self.dA(u0), self.dB(u0), self.dC(u0)
        cA = B * dA - A * dB
        cB = C * dA - A * dC
        cC = C * dB - B * dC
        return cA * u1 * um1 + HALF * cB * (u1 + um1) + cC

    def f1(self, um2, um1, u0, u1, u2, calR_sign=1):
        """First higher symmetry on the five-point stencil."""
        d = _nonzero_gap(u1, um1)
        fp = self.rhs(u0, u1, u2)
        fm = self.rhs(um2, um1, u0)
        r0 = self.r(u0, um1)
        r1 = self.r(u1, u0)
        return calR_sign * self.calR(u1, u0, um1) / d - (r0 * fp + r1 * fm) / (d * d)

    def to_json(self):
        return self.coeffs.to_json()


def ydkn_rhs(flow: YdKNFlow, um1, u0, u1):
    return flow.rhs(um1, u0, u1)


def f1_rhs(flow: YdKNFlow, um2, um1, u0, u1, u2):
    return flow.f1(um2, um1, u0, u1, u2)


# flow sources ---------------------------------------------------------------


def _base_name(eq: QuadEquation):
    return eq.name[:-2] if eq.name.endswith("^T") else eq.name


def table_flow(eq: QuadEquation) -> Callable:
    """alpha -> the listed YdKN flow of a catalog equation (n-direction of ``eq``)."""
    base = _base_name(eq)
    if base not in CATALOG or base in ("A1", "A2"):
        raise UnknownEquation(f"no table flow for {eq.name}")

    def make(alpha, beta=None):
        return YdKNFlow(ydkn_table(base, alpha, eq.delta, eq.g2, eq.g3))

    return make


def h_flow(eq: QuadEquation) -> Callable:
    """(alpha, beta) -> the flow read off the biquadratic h of ``eq``."""
    h = h_polynomial(eq)

    def make(alpha, beta):
        return YdKNFlow(extract_ydkn_coefficients(h, alpha, beta))

    return make


def default_flow(eq: QuadEquation) -> Callable:
    try:
        return table_flow(eq)
    except UnknownEquation:
        return h_flow(eq)


# table check ------------------------------------------------------------------


def check_ydkn_table(
    eq: QuadEquation, samples=5, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES, table=None
):
    """Coefficients read from h agree with the listed table up to one scalar.

    Equations without a table entry only need h to be symmetric biquadratic.
    ``table`` overrides the reference: a callable (alpha, beta) -> YdKNFlow.
    """
    h = h_polynomial(eq)
    if table is None:
        try:
            table = table_flow(eq)
        except UnknownEquation:
            table = None
    seen = {}

    def draw(r):
        a, b = eq.draw_params(r, 2, bound)
        return {"alpha": a, "beta": b}

    def test(s):
        try:
            got = extract_ydkn_coefficients(h, s["alpha"], s["beta"])
        except NotBiquadratic as exc:
            return {"not_biquadratic": str(exc)}
        seen.setdefault("first", got)
        if table is None:
            return 0
        want = table(s["alpha"], s["beta"]).coeffs
        k = got.ratio_to(want)
        if k is None:
            return {"extracted": got.to_json(), "table": want.to_json()}
        return 0

    rep = run_samples("ydkn-table", draw, test, samples, rng, retries)
    rep.details["source"] = "table" if table is not None else "h-polynomial"
    if "first" in seen and table is None:
        rep.details["coefficients"] = seen["first"].to_json()
    return rep


def check_iden(flow: YdKNFlow, samples=8, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES, r=None):
    """R0/(u1-u-1) = r0/(u1-u-1) + 1/2 d_{u-1} r0 = r1/(u1-u-1) - 1/2 d_{u1} r1."""
    r = r or flow.r

    def draw(rr):
        return {k: rand_rational(rr, bound) for k in ("um1", "u0", "u1")}

    def test(s):
        um1, u0, u1 = s["um1"], s["u0"], s["u1"]
        lhs = flow.rhs(um1, u0, u1)
        d = u1 - um1
        r0 = r(u0, Jet.variable(um1, "y"))
        r1 = r(Jet.variable(u1, "x"), u0)
        left = r0.value / d + HALF * r0.d("y")
        right = r1.value / d - HALF * r1.d("x")
        return {"minus": lhs - left, "plus": lhs - right}

    return run_samples("iden", draw, test, samples, rng, retries)


# tau flow ---------------------------------------------------------------------


@dataclass(frozen=True)
class TauState:
    coeffs: YdKNCoefficients
    rates: YdKNCoefficients

    def to_json(self):
        return {"coeffs": self.coeffs.to_json(), "rates": self.rates.to_json()}


def _poly_r(c: YdKNCoefficients):
    """r as {(i, j): coefficient of x^i y^j}."""
    return {
        (2, 2): c.c1,
        (2, 1): 2 * c.c2,
        (1, 2): 2 * c.c2,
        (2, 0): c.c3,
        (0, 2): c.c3,
        (1, 1): 2 * c.c4,
        (1, 0): 2 * c.c5,
        (0, 1): 2 * c.c5,
        (0, 0): c.c6,
    }


def _pmul(p, q):
    out = {}
    for (i, j), a in p.items():
        for (k, l), b in q.items():
            out[(i + k, j + l)] = out.get((i + k, j + l), 0) + a * b
    return out


def _pdiff(p, axis):
    out = {}
    for (i, j), a in p.items():
        e = (i, j)[axis]
        if e:
            key = (i - 1, j) if axis == 0 else (i, j - 1)
            out[key] = out.get(key, 0) + e * a
    return out


def _psub(p, q):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) - v
    return out


def tau_derivative(coeffs: YdKNCoefficients) -> TauState:
    """c-dot from 2 d_tau r = r r_xy - r_x r_y, read off the biquadratic pattern."""
    r = _poly_r(coeffs)
    rx, ry = _pdiff(r, 0), _pdiff(r, 1)
    rhs = _psub(_pmul(r, _pdiff(rx, 1)), _pmul(rx, ry))
    extra = {k: v for k, v in rhs.items() if (k[0] > 2 or k[1] > 2) and not is_zero(v)}
    if extra:
        raise NotBiquadratic(f"tau right-hand side leaves the biquadratic class: {sorted(extra)}")
    g = lambda i, j: rhs.get((i, j), 0)
    rates = YdKNCoefficients(
        g(2, 2) / 2,
        g(2, 1) / 4,
        g(2, 0) / 2,
        g(1, 1) / 4,
        g(1, 0) / 4,
        g(0, 0) / 2,
    )
    return TauState(coeffs, rates)


def f1_by_tau_route(flow: YdKNFlow, um2, um1, u0, u1, u2):
    """f1 = d_tau f0 + f0_{+1} d_{u1} f0 - f0_{-1} d_{u-1} f0 with exact jets."""
    rates = YdKNFlow(tau_derivative(flow.coeffs).rates)
    f0 = flow.rhs(Jet.variable(um1, -1), u0, Jet.variable(u1, 1))
    dtau = rates.rhs(um1, u0, u1)
    return dtau + flow.rhs(u0, u1, u2) * f0.d(1) - flow.rhs(um2, um1, u0) * f0.d(-1)


def f1_by_master_symmetry(flow: YdKNFlow, stencil: dict, n: int):
    """d f0_n/d tau - d g_n / d eps with g_k = k f0_k, at explicit site index n.

    ``stencil`` maps absolute site k to u_k for k = n-2 .. n+2.
    """
    u = stencil
    rates = YdKNFlow(tau_derivative(flow.coeffs).rates)
    f0n = flow.rhs(Jet.variable(u[n - 1], n - 1), Jet.variable(u[n], n), Jet.variable(u[n + 1], n + 1))
    f0 = {k: flow.rhs(u[k - 1], u[k], u[k + 1]) for k in (n - 1, n, n + 1)}
    dtau = rates.rhs(u[n - 1], u[n], u[n + 1]) + sum(k * f0[k] * f0n.d(k) for k in f0)
    deps_g = n * sum(f0[k] * f0n.d(k) for k in f0)
    return dtau - deps_g


def check_f1_routes(flow: YdKNFlow, samples=10, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES):
    """Closed-form f1 against the tau route and the master-symmetry route."""

    def draw(r):
        s = {f"u{k}": rand_rational(r, bound) for k in range(5)}
        s["n"] = r.randint(-50, 50)
        return s

    def test(s):
        v = [s[f"u{k}"] for k in range(5)]
        closed = flow.f1(*v)
        tau = f1_by_tau_route(flow, *v)
        n = s["n"]
        master = f1_by_master_symmetry(flow, {n - 2 + k: v[k] for k in range(5)}, n)
        return {"tau_route": closed - tau, "master_symmetry": closed - master}

    return run_samples("f1-routes", draw, test, samples, rng, retries)


# compatibility with the quad equation ---------------------------------------


def _flow_for(eq, flow, alpha, beta):
    return flow(alpha, beta)


def _xi_partials(eq, u00, u10, u01, alpha, beta, site=None):
    x = solve_corner(
        eq, Jet.variable(u00, "00"), Jet.variable(u10, "10"), Jet.variable(u01, "01"), alpha, beta, site
    )
    return x.value, x.d("00"), x.d("10"), x.d("01")


def _oriented(eq, direction):
    if direction == "n":
        return eq
    if direction == "m":
        return eq.transposed()
    raise ValueError("direction must be 'n' or 'm'")


def check_three_point_compatibility(
    eq: QuadEquation,
    flow: Callable | None = None,
    direction: str = "n",
    betas=None,
    samples=10,
    rng=None,
    bound=DEFAULT_BOUND,
    retries=DEFAULT_RETRIES,
):
    """f11 = f00 xi_00 + f10 xi_10 + f01 xi_01 on every row of a patch.

    ``betas`` gives beta_m for rows m = 0, 1, ... (x-coordinates for Q4);
    by default one random beta and a single row.  ``flow`` maps
    (alpha, beta_0) to a YdKNFlow; the direction is that of ``eq`` after
    orientation, so direction 'm' exchanges the lattice axes first.
    """
    eq = _oriented(eq, direction)
    flow = flow or default_flow(eq)

    def draw(r):
        if betas is None:
            alpha, beta = eq.draw_params(r, 2, bound)
            row_betas = [beta]
        else:
            alpha, *row_betas = _params_with_rows(eq, r, betas, bound)
        rows = len(row_betas)
        cross = CrossData(
            {k: rand_rational(r, bound) for k in range(-1, 3)},
            {l: rand_rational(r, bound) for l in range(1, rows + 1)},
        )
        return {"alpha": alpha, "betas": row_betas, "cross": cross}

    def test(s):
        alpha, row_betas = s["alpha"], s["betas"]
        params = ParameterSequence.rows(alpha, row_betas)
        patch = extend_patch(eq, s["cross"], params)
        u = patch.values
        fl = _flow_for(eq, flow, alpha, row_betas[0])
        out = []
        for m, beta in enumerate(row_betas):
            f00 = fl.rhs(u[(-1, m)], u[(0, m)], u[(1, m)])
            f10 = fl.rhs(u[(0, m)], u[(1, m)], u[(2, m)])
            f01 = fl.rhs(u[(-1, m + 1)], u[(0, m + 1)], u[(1, m + 1)])
            f11 = fl.rhs(u[(0, m + 1)], u[(1, m + 1)], u[(2, m + 1)])
            _, x00, x10, x01 = _xi_partials(eq, u[(0, m)], u[(1, m)], u[(0, m + 1)], alpha, beta, (1, m + 1))
            out.append(f11 - (f00 * x00 + f10 * x10 + f01 * x01))
        return out

    name = "3pt" if betas is None else "3pt-nonautonomous"
    details = {"direction": direction}
    if betas is not None:
        details["betas"] = [b if not hasattr(b, "x") else b.x for b in betas]
    return run_samples(name, draw, test, samples, rng, retries, details)


def _params_with_rows(eq, rng, betas, bound):
    """alpha drawn at random, betas fixed (x-coordinates for elliptic equations)."""
    if not eq.elliptic:
        while True:
            alpha = rand_rational(rng, bound)
            if alpha != 0 and alpha not in betas:
                return [alpha] + [Fraction(b) for b in betas]
    from .catalog import draw_curve_points

    while True:
        alpha_x = rand_rational(rng, bound)
        if alpha_x not in betas:
            break
    return draw_curve_points(rng, len(betas) + 1, eq.g2, eq.g3, bound, xs=[alpha_x] + [Fraction(b) for b in betas])


def check_five_point_compatibility(
    eq: QuadEquation,
    flow: Callable | None = None,
    direction: str = "n",
    samples=10,
    rng=None,
    bound=DEFAULT_BOUND,
    retries=DEFAULT_RETRIES,
    calR_sign=1,
):
    """sum over corners of f1_ij dE/du_ij vanishes on solutions."""
    eq = _oriented(eq, direction)
    flow = flow or default_flow(eq)

    def draw(r):
        alpha, beta = eq.draw_params(r, 2, bound)
        cross = CrossData({k: rand_rational(r, bound) for k in range(-2, 4)}, {1: rand_rational(r, bound)})
        return {"alpha": alpha, "beta": beta, "cross": cross}

    def test(s):
        alpha, beta = s["alpha"], s["beta"]
        patch = extend_patch(eq, s["cross"], ParameterSequence(alpha, beta))
        u = patch.values
        fl = _flow_for(eq, flow, alpha, beta)

        def f1(n, m):
            return fl.f1(*(u[(n + k, m)] for k in range(-2, 3)), calR_sign=calR_sign)

        J = {c: Jet.variable(u[s_], c) for c, s_ in (("00", (0, 0)), ("10", (1, 0)), ("01", (0, 1)), ("11", (1, 1)))}
        E = residual(eq, J["00"], J["10"], J["01"], J["11"], alpha, beta)
        return (
            f1(0, 0) * E.d("00") + f1(1, 0) * E.d("10") + f1(0, 1) * E.d("01") + f1(1, 1) * E.d("11")
        )

    details = {"direction": direction}
    return run_samples("5pt", draw, test, samples, rng, retries, details)


def check_flow_commutativity(
    flow0: YdKNFlow, flow1: YdKNFlow | None = None, samples=8, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES
):
    """[f0, f1] = 0 at site 0 of a seven-point stencil; ``flow1`` supplies f1."""
    flow1 = flow1 or flow0

    def draw(r):
        return {f"u{k}": rand_rational(r, bound) for k in range(-3, 4)}

    def test(s):
        u = {k: s[f"u{k}"] for k in range(-3, 4)}
        J = {k: Jet.variable(u[k], k) for k in range(-2, 3)}
        f1_0 = flow1.f1(J[-2], J[-1], J[0], J[1], J[2])
        f0_0 = flow0.rhs(J[-1], J[0], J[1])
        f0 = {k: flow0.rhs(u[k - 1], u[k], u[k + 1]) for k in range(-2, 3)}
        f1 = {k: flow1.f1(u[k - 2], u[k - 1], u[k], u[k + 1], u[k + 2]) for k in range(-1, 2)}
        lhs = sum(f0[k] * f1_0.d(k) for k in range(-2, 3))
        rhs = sum(f1[k] * f0_0.d(k) for k in range(-1, 2))
        return lhs - rhs

    return run_samples("commutator", draw, test, samples, rng, retries)

"""Integrability battery: affine-linearity, square symmetry, cube and Lax checks."""

from __future__ import annotations

from itertools import combinations

from .catalog import CORNERS, LAX_NAMES, QuadEquation, lax_data
from .errors import DegenerateSample, ZeroMatrixEntry
from .field import FieldElement, is_zero
from .lattice import residual, solve_corner
from .sampling import (
    DEFAULT_BOUND,
    DEFAULT_RETRIES,
    CheckReport,
    not_applicable,
    rand_rational,
    run_samples,
)


def _second_derivatives(eq: QuadEquation):
    cache = eq.__dict__.setdefault("_second_derivs", {})
    if "d2" not in cache:
        cache["d2"] = {c: eq.expr.diff(c).diff(c) for c in CORNERS}
    return cache["d2"]


def _draw_corners(rng, bound, names=CORNERS):
    return {c: rand_rational(rng, bound) for c in names}


def check_affine_linear(eq: QuadEquation, samples=20, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES):
    """Every pure second derivative in a corner vanishes at random points."""
    d2 = _second_derivatives(eq)

    def draw(r):
        s = _draw_corners(r, bound)
        s["alpha"], s["beta"] = eq.draw_params(r, 2, bound)
        return s

    def test(s):
        env = eq.env(s["alpha"], s["beta"])
        env.update({c: s[c] for c in CORNERS})
        return {c: e.evaluate(env) for c, e in d2.items()}

    return run_samples("affine", draw, test, samples, rng, retries)


def check_square_symmetry(eq: QuadEquation, samples=20, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES):
    """Find signs eps, sigma with
    E(u00,u01,u10,u11; b,a) = eps E  and  E(u10,u00,u11,u01; a,b) = sigma E.

    The signs are fixed by the first usable sample and then required everywhere.
    """
    signs = {}

    def draw(r):
        s = _draw_corners(r, bound)
        s["alpha"], s["beta"] = eq.draw_params(r, 2, bound)
        return s

    def test(s):
        a, b = s["alpha"], s["beta"]
        u00, u10, u01, u11 = (s[c] for c in CORNERS)
        e = residual(eq, u00, u10, u01, u11, a, b)
        flip = residual(eq, u00, u01, u10, u11, b, a)
        swap = residual(eq, u10, u00, u11, u01, a, b)
        if not signs:
            if is_zero(e):
                raise DegenerateSample("E vanished at the reference sample")
            signs["eps"] = _as_rational(flip / e)
            signs["sigma"] = _as_rational(swap / e)
            if any(x not in (1, -1) for x in signs.values()):
                bad = dict(signs)
                signs.clear()
                return {"eps_ratio": bad["eps"] - 1, "sigma_ratio": bad["sigma"] - 1}
        return {"diagonal": flip - signs["eps"] * e, "reflection": swap - signs["sigma"] * e}

    rep = run_samples("square-symmetry", draw, test, samples, rng, retries)
    if signs:
        rep.details.update(eps=int(signs["eps"]), sigma=int(signs["sigma"]))
    return rep


def _as_rational(x):
    """Tower elements that happen to be rational become Fractions, so they
    mix with samples from other towers."""
    if isinstance(x, FieldElement) and x.is_rational():
        return x.rational()
    return x


def cube_routes(eq: QuadEquation, u000, u100, u010, u001, a1, a2, a3) -> dict:
    """The three face values and the three ways to reach u111."""
    u110 = solve_corner(eq, u000, u100, u010, a1, a2, site="u110")
    u101 = solve_corner(eq, u000, u100, u001, a1, a3, site="u101")
    u011 = solve_corner(eq, u000, u010, u001, a2, a3, site="u011")
    return {
        "u110": u110,
        "u101": u101,
        "u011": u011,
        "u111": (
            solve_corner(eq, u100, u110, u101, a2, a3, site="u111(x)"),
            solve_corner(eq, u010, u110, u011, a1, a3, site="u111(y)"),
            solve_corner(eq, u001, u101, u011, a1, a2, site="u111(z)"),
        ),
    }


def check_cube_consistency(eq: QuadEquation, samples=10, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES):
    def draw(r):
        s = {k: rand_rational(r, bound) for k in ("u000", "u100", "u010", "u001")}
        s["a1"], s["a2"], s["a3"] = eq.draw_params(r, 3, bound)
        return s

    def test(s):
        w = cube_routes(eq, s["u000"], s["u100"], s["u010"], s["u001"], s["a1"], s["a2"], s["a3"])["u111"]
        return {"xy": w[0] - w[1], "xz": w[0] - w[2]}

    return run_samples("cube", draw, test, samples, rng, retries)


def _matmul(A, B):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2))


def lax_discrepancy(lax, u00, u10, u01, u11, alpha, beta, lam) -> dict:
    """Cross products of P and Q plus the squared normalization residual."""
    L = lax.matrix
    P = _matmul(L(u01, u11, alpha, lam), L(u00, u01, beta, lam))
    Q = _matmul(L(u10, u11, beta, lam), L(u00, u10, alpha, lam))
    p = [P[0][0], P[0][1], P[1][0], P[1][1]]
    q = [Q[0][0], Q[0][1], Q[1][0], Q[1][1]]
    cross = [p[i] * q[j] - p[j] * q[i] for i, j in combinations(range(4), 2)]
    pivot = next((i for i in range(4) if not is_zero(q[i])), None)
    if pivot is None:
        raise ZeroMatrixEntry("Q vanished")
    kappa = p[pivot] / q[pivot]
    rho = lax.rho_value
    norm = kappa * kappa * rho(u00, u10, alpha) * rho(u10, u11, beta) - rho(u01, u11, alpha) * rho(u00, u01, beta)
    return {"cross": cross, "norm": norm}


def check_lax_compatibility(
    eq: QuadEquation, samples=5, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES, on_shell=True, lax=None
):
    """Proportionality of the two paths around a square, then the squared normalization.

    ``on_shell=False`` draws u11 at random instead of solving E = 0 (negative control).
    """
    if lax is None:
        if eq.name not in LAX_NAMES:
            return not_applicable("lax", f"no Lax data for {eq.name}")
        lax = lax_data(eq)

    def draw(r):
        s = _draw_corners(r, bound, ("u00", "u10", "u01"))
        s["alpha"], s["beta"], s["lam"] = eq.draw_params(r, 3, bound)
        if on_shell:
            s["u11"] = solve_corner(eq, s["u00"], s["u10"], s["u01"], s["alpha"], s["beta"])
        else:
            s["u11"] = rand_rational(r, bound)
        return s

    def test(s):
        return lax_discrepancy(lax, s["u00"], s["u10"], s["u01"], s["u11"], s["alpha"], s["beta"], s["lam"])

    name = "lax" if on_shell else "lax-off-shell"
    return run_samples(name, draw, test, samples, rng, retries)

"""Miura map to the discrete Schroedinger problem and the Volterra pushforward."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .catalog import LaxData, QuadEquation, lax_data
from .errors import DegenerateStencil, InsufficientSeeds, NotApplicable, ZeroMu, ZeroPotential
from .field import QQ, is_zero, to_json_value
from .jet import Jet
from .sampling import DEFAULT_BOUND, DEFAULT_RETRIES, rand_nonzero, rand_rational, run_samples
from .symmetry import YdKNFlow

MIURA_NAMES = ("H1", "H2", "H3", "Q1", "Q2", "Q3")
HALF = Fraction(1, 2)


def _lax(eq) -> LaxData:
    if isinstance(eq, LaxData):
        return eq
    name = eq.name if isinstance(eq, QuadEquation) else str(eq).upper()
    if name not in MIURA_NAMES:
        raise NotApplicable(f"no Miura map for {name}")
    return lax_data(eq)


def _gap(a, b):
    d = a - b
    if is_zero(d):
        raise DegenerateStencil("coincident values in the Miura stencil")
    return d


def _exact(x):
    return Fraction(x) if type(x) is int else x


def _as_map(u) -> dict:
    items = u.items() if isinstance(u, Mapping) else enumerate(u)
    return {int(k): _exact(x) for k, x in items}


@dataclass
class SchroedingerPotential:
    """v_n on a range of sites, optionally with p = mu**(-1/2)."""

    v: dict
    alpha: object = None
    p: object = None

    def __getitem__(self, n):
        return self.v[n]

    def sites(self):
        return sorted(self.v)

    def to_json(self):
        out = {"v": {str(n): to_json_value(x) for n, x in sorted(self.v.items())}}
        if self.p is not None:
            out["p"] = to_json_value(self.p)
        return out


def potential_v(eq, u, alpha) -> SchroedingerPotential:
    """v_n = rho(u_n, u_{n+1}) / ((u_{n+1} - u_{n-1}) (u_{n+2} - u_n)) wherever defined."""
    lax = _lax(eq)
    u = _as_map(u)
    alpha = _exact(alpha)
    v = {}
    for n in sorted(u):
        if n - 1 in u and n + 1 in u and n + 2 in u:
            rho = lax.rho_value(u[n], u[n + 1], alpha)
            v[n] = rho / (_gap(u[n + 1], u[n - 1]) * _gap(u[n + 2], u[n]))
    return SchroedingerPotential(v, alpha)


def check_greece2(eq, samples=8, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES, lax=None):
    """d_{u1} rho_0 + d_{u-1} rho_{-1} = 2 (rho_0 - rho_{-1}) / (u1 - u-1),
    and v_0 (u2 - u0) - v_{-1} (u0 - u-2) equals half the left side."""
    lax = lax or _lax(eq)

    def draw(r):
        s = {f"u{k}": rand_rational(r, bound) for k in range(-2, 3)}
        s["alpha"] = eq.draw_params(r, 1, bound)[0] if isinstance(eq, QuadEquation) else rand_nonzero(r, bound)
        return s

    def test(s):
        um2, um1, u0, u1, u2 = (s[f"u{k}"] for k in range(-2, 3))
        a = s["alpha"]
        rho0 = lax.rho_value(u0, Jet.variable(u1, 1), a)
        rhom = lax.rho_value(Jet.variable(um1, -1), u0, a)
        rho0, rhom = Jet._lift(rho0), Jet._lift(rhom)
        dsum = rho0.d(1) + rhom.d(-1)
        d = _gap(u1, um1)
        first = dsum - 2 * (rho0.value - rhom.value) / d
        v0 = rho0.value / (d * _gap(u2, u0))
        vm = rhom.value / (_gap(u0, um2) * d)
        second = v0 * (u2 - u0) - vm * (u0 - um2) - HALF * dsum
        return {"rho": first, "potential": second}

    return run_samples("greece2", draw, test, samples, rng, retries)


# recurrences ----------------------------------------------------------------


def _recurrence_terms(name, v0, vm, alpha):
    """Coefficients of u_{-2}, u_{-1}, u_0, u_1 and the constant; u_2 has coefficient 1."""
    if is_zero(v0):
        raise ZeroPotential("v vanished where the recurrence divides by it")
    if name == "H1":
        return vm / v0, 0, -(v0 + vm) / v0, 0, 0
    if name == "H2":
        return vm / v0, 0, -(v0 + vm) / v0, 0, -1 / v0
    if name == "H3":
        return vm / v0, 0, -(1 + v0 + vm) / v0, 0, 0
    if name == "Q1":
        return vm / v0, -1 / v0, (2 - v0 - vm) / v0, -1 / v0, 0
    if name == "Q2":
        return vm / v0, -1 / v0, (2 - v0 - vm) / v0, -1 / v0, 2 * alpha * alpha / v0
    if name == "Q3":
        return vm / v0, -alpha / v0, (alpha * alpha + 1 - v0 - vm) / v0, -alpha / v0, 0
    raise NotApplicable(f"no recurrence for {name}")


def _name(eq):
    return eq.name if isinstance(eq, (QuadEquation, LaxData)) else str(eq).upper()


def recurrence_residual(eq, u, v: SchroedingerPotential, site: int, alpha=None):
    """Left side of the linear recurrence linking u and v at ``site``."""
    u = _as_map(u)
    n = site
    alpha = v.alpha if alpha is None else alpha
    try:
        stencil = [u[n + k] for k in range(-2, 3)]
        v0, vm = v[n], v[n - 1]
    except KeyError:
        raise DegenerateStencil(f"site {n} lacks neighbours") from None
    cm2, cm1, c0, c1, k = _recurrence_terms(_name(eq), v0, vm, alpha)
    return stencil[4] + c1 * stencil[3] + c0 * stencil[2] + cm1 * stencil[1] + cm2 * stencil[0] + k


def invert_miura(eq, v: SchroedingerPotential, seeds: Mapping, stop: int | None = None, alpha=None) -> dict:
    """Forward solution of the recurrence from the seeds, up to site ``stop``.

    The H recurrences step by two, so each sublattice advances on its own
    from two seeds u_s, u_{s+2}; a sublattice without seeds is left empty.
    The Q recurrences need four consecutive seeds.  ``stop`` defaults to
    the furthest site v reaches.
    """
    alpha = v.alpha if alpha is None else alpha
    name = _name(eq)
    u = _as_map(seeds)
    if not u:
        raise InsufficientSeeds("no seeds given")
    if stop is None:
        stop = max(v.v) + 2 if v.v else max(u)
    if name in ("H1", "H2", "H3"):
        starts = []
        for parity in (0, 1):
            sites = sorted(k for k in u if k % 2 == parity)
            pair = next((k for k in sites if k + 2 in u), None)
            if sites and pair is None:
                raise InsufficientSeeds(f"sublattice of parity {parity} needs two seeds two sites apart")
            if pair is not None:
                starts.append(pair)
        if not starts:
            raise InsufficientSeeds("need two seeds on some sublattice")
    else:
        s = min(u)
        if any(s + i not in u for i in range(4)):
            raise InsufficientSeeds("need seeds at four consecutive sites")
        starts = [s]
    for target in range(min(starts) + 2, stop + 1):
        if target in u:
            continue
        site = target - 2
        if site - 2 not in u or site not in u:
            continue
        if site not in v.v or site - 1 not in v.v:
            break
        cm2, cm1, c0, c1, k = _recurrence_terms(name, v[site], v[site - 1], alpha)
        if c1 or cm1:
            if site + 1 not in u or site - 1 not in u:
                raise InsufficientSeeds(f"site {target} needs both neighbours of {site}")
            lower = c1 * u[site + 1] + cm1 * u[site - 1]
        else:
            lower = 0
        u[target] = -(lower + c0 * u[site] + cm2 * u[site - 2] + k)
    return dict(sorted(u.items()))


# Volterra pushforward -------------------------------------------------------


def volterra_variable(flow: YdKNFlow, um1, u0, u1, u2):
    """u~_0 = -r_1 / ((u2 - u0)(u1 - u-1)) with r_1 = r(u1, u0)."""
    return -flow.r(u1, u0) / (_gap(u2, u0) * _gap(u1, um1))


def volterra_pushforward_check(flow: YdKNFlow, samples=8, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES):
    """d u~_0 / d eps = s u~_0 (u~_1 - u~_{-1}) along the flow, s = +1 or -1 found once."""
    if not flow.coeffs.volterra_reducible:
        raise NotApplicable("flow has c1 or c2 nonzero; no Miura map to the Volterra lattice")
    sign = {}

    def draw(r):
        return {f"u{k}": rand_rational(r, bound) for k in range(-2, 4)}

    def test(s):
        u = {k: s[f"u{k}"] for k in range(-2, 4)}
        J = {k: Jet.variable(u[k], k) for k in range(-1, 3)}
        w0 = volterra_variable(flow, J[-1], J[0], J[1], J[2])
        f = {k: flow.rhs(u[k - 1], u[k], u[k + 1]) for k in range(-1, 3)}
        lhs = sum(w0.d(k) * f[k] for k in range(-1, 3))
        wp = volterra_variable(flow, u[0], u[1], u[2], u[3])
        wm = volterra_variable(flow, u[-2], u[-1], u[0], u[1])
        target = w0.value * (wp - wm)
        if "s" not in sign:
            if is_zero(target):
                raise DegenerateStencil("Volterra right-hand side vanished")
            ratio = lhs / target
            if ratio not in (1, -1):
                return {"sign_ratio": ratio}
            sign["s"] = ratio
        return lhs - sign["s"] * target

    rep = run_samples("volterra", draw, test, samples, rng, retries)
    if "s" in sign:
        rep.details["sign"] = int(sign["s"])
    return rep


# Schroedinger reduction -------------------------------------------------------


def check_schroedinger_reduction(
    eq, samples=3, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES, mu_exponent=HALF, lax=None, params=None
):
    """phi from the scalar problem, chi = phi / (mu^(n/2) s_n), then
    chi_{-1} + v_0 chi_1 = mu^(-1/2) chi_0 exactly.

    ``mu_exponent`` replaces the 1/2 in mu^(n/2) (a planted defect when not 1/2).
    ``params`` pins (alpha, lam) instead of drawing them.
    """
    lax = lax or _lax(eq)

    def draw(r):
        s = {f"u{k}": rand_rational(r, bound) for k in range(-1, 3)}
        if params is None:
            s["alpha"], s["lam"] = eq.draw_params(r, 2, bound)
        else:
            s["alpha"], s["lam"] = (_exact(x) for x in params)
        s["phi-1"], s["phi0"] = rand_rational(r, bound), rand_rational(r, bound)
        return s

    def test(s):
        um1, u0, u1, u2 = (s[f"u{k}"] for k in range(-1, 3))
        a, lam = s["alpha"], s["lam"]
        mu = lax.mu_value(a, lam)
        if is_zero(mu):
            raise ZeroMu("mu vanished")
        rho_m = lax.rho_value(um1, u0, a)
        rho_0 = lax.rho_value(u0, u1, a)
        if is_zero(rho_m) or is_zero(rho_0):
            raise DegenerateStencil("rho vanished")
        tower = QQ
        tower, sq_mu = tower.sqrt_or_adjoin(mu, "sqrt_mu")
        tower, sq_rm = tower.sqrt_or_adjoin(rho_m, "sqrt_rho_m")
        tower, sq_r0 = tower.sqrt_or_adjoin(rho_0, "sqrt_rho_0")
        sq_mu, sq_rm = tower.embed(sq_mu), tower.embed(sq_rm)
        phi = {-1: tower.embed(s["phi-1"]), 0: tower.embed(s["phi0"])}
        # scalar problem at site -1 gives phi_1
        phi[1] = ((u1 - um1) * phi[0] - sq_rm * mu * phi[-1]) / sq_r0
        sgauge = {0: tower.embed(1)}
        sgauge[-1] = _gap(u1, um1) / sq_rm
        sgauge[1] = sq_r0 / _gap(u2, u0)
        if mu_exponent == HALF:
            scale = {k: sq_mu**k for k in (-1, 0, 1)}
        else:
            root = mu if mu_exponent == 1 else mu ** int(mu_exponent)
            scale = {k: tower.embed(root) ** k for k in (-1, 0, 1)}
        chi = {k: phi[k] / (scale[k] * sgauge[k]) for k in (-1, 0, 1)}
        v0 = potential_v(lax, {-1: um1, 0: u0, 1: u1, 2: u2}, a)[0]
        return chi[-1] + v0 * chi[1] - chi[0] / sq_mu

    return run_samples("schroedinger", draw, test, samples, rng, retries)


def check_miura_roundtrip(
    eq, samples=3, sites=20, rng=None, bound=DEFAULT_BOUND, retries=DEFAULT_RETRIES, lax=None
):
    """Random u on ``sites`` sites -> v -> u again from four seeds, exactly;
    every recurrence residual along the way must vanish.

    ``lax`` replaces the normalization data that builds v (planted defects).
    """
    lax = lax or _lax(eq)
    name = _name(eq)

    def draw(r):
        s = {"u": [rand_rational(r, bound) for _ in range(sites)]}
        s["alpha"] = eq.draw_params(r, 1, bound)[0] if isinstance(eq, QuadEquation) else rand_nonzero(r, bound)
        return s

    def test(s):
        u = dict(enumerate(s["u"]))
        v = potential_v(lax, u, s["alpha"])
        if any(is_zero(x) for x in v.v.values()):
            raise ZeroPotential("v vanished on the sample")
        back = invert_miura(name, v, {k: u[k] for k in range(4)}, stop=sites - 1)
        res = [recurrence_residual(name, u, v, n) for n in range(2, sites - 2)]
        missing = [k for k in range(sites) if k not in back]
        if missing:
            return {"missing_sites": [1] * len(missing)}
        return {"recovered": [back[k] - u[k] for k in range(sites)], "recurrence": res}

    return run_samples("miura-roundtrip", draw, test, samples, rng, retries, {"sites": sites})

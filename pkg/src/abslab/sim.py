"""Double-precision integration of three-point flows and Baecklund chains.

Everything here is floating point; the exact machinery elsewhere in the
package is used only to build the flow coefficients and the quad equation.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from dataclasses import dataclass, field, replace

import numpy as np

from .catalog import CORNERS, QuadEquation, YdKNCoefficients, build_equation
from .errors import ConfigError, InsufficientData, NonFiniteState, StencilCollapse, XiDegenerate
from .symmetry import YdKNFlow, default_flow

BOUNDARIES = ("frozen", "linear")


@dataclass(frozen=True)
class SimConfig:
    N: int = 16
    h: float = 1e-3
    horizon: float = 1.0
    boundary: str = "frozen"
    alpha: float = 2.0
    beta0: float = 3.0
    tol: float = 1e-6
    stencil_tol: float = 1e-12
    anchor: int = 1

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 5:
            raise ConfigError(f"lattice size N must be an integer >= 5, got {self.N!r}")
        if not self.h > 0:
            raise ConfigError(f"step h must be positive, got {self.h!r}")
        if not self.tol > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tol!r}")
        if self.horizon < 0:
            raise ConfigError("horizon must be non-negative")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")
        if not 0 < self.anchor < self.N - 1:
            raise ConfigError("anchor must be an interior site")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.h))

    @classmethod
    def from_steps(cls, steps: int, h: float = 1e-3, **kw) -> "SimConfig":
        if steps < 0:
            raise ConfigError("steps must be non-negative")
        return cls(h=h, horizon=steps * h, **kw)

    def to_json(self):
        return {
            "N": self.N,
            "h": self.h,
            "horizon": self.horizon,
            "steps": self.steps,
            "boundary": self.boundary,
            "alpha": self.alpha,
            "beta0": self.beta0,
            "tol": self.tol,
            "anchor": self.anchor,
        }


@dataclass(frozen=True)
class FloatFlow:
    """The three-point flow with coefficients rounded to doubles; acts on arrays."""

    c: tuple

    @classmethod
    def of(cls, flow) -> "FloatFlow":
        if isinstance(flow, FloatFlow):
            return flow
        if isinstance(flow, YdKNFlow):
            flow = flow.coeffs
        if isinstance(flow, YdKNCoefficients):
            return cls(tuple(float(x) for x in flow.as_tuple()))
        return cls(tuple(float(x) for x in flow))

    def rhs(self, um1, u0, u1):
        c1, c2, c3, c4, c5, c6 = self.c
        A = c1 * u0 * u0 + 2 * c2 * u0 + c3
        B = c2 * u0 * u0 + c4 * u0 + c5
        C = c3 * u0 * u0 + 2 * c5 * u0 + c6
        return (A * u1 * um1 + B * (u1 + um1) + C) / (u1 - um1)

    def to_json(self):
        return {f"c{i + 1}": x for i, x in enumerate(self.c)}


@dataclass
class Trajectory:
    times: list
    states: list  # numpy arrays, one per time
    flow: FloatFlow
    meta: dict = field(default_factory=dict)
    origin: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")

    @property
    def N(self):
        return len(self.states[0])

    def array(self) -> np.ndarray:
        return np.vstack(self.states)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eps", "n", "value"])
            for t, s in zip(self.times, self.states):
                for n, x in enumerate(s):
                    w.writerow([repr(float(t)), n, repr(float(x))])

    def to_json(self):
        return {
            "meta": self.meta,
            "flow": self.flow.to_json(),
            "times": [float(t) for t in self.times],
            "states": [[float(x) for x in s] for s in self.states],
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)


# ---------------------------------------------------------------------------


def _check_stencils(u, eps, tol, linear):
    gaps = np.abs(u[2:] - u[:-2])
    bad = np.nonzero(gaps <= tol)[0]
    if bad.size:
        raise StencilCollapse(eps, int(bad[0]) + 1)
    if linear and (abs(u[1] - u[0]) <= tol or abs(u[-1] - u[-2]) <= tol):
        raise StencilCollapse(eps, 0 if abs(u[1] - u[0]) <= tol else len(u) - 1)


def _lattice_rhs(flow: FloatFlow, u, eps, config: SimConfig):
    linear = config.boundary == "linear"
    _check_stencils(u, eps, config.stencil_tol, linear)
    if linear:
        ext = np.concatenate(([2 * u[0] - u[1]], u, [2 * u[-1] - u[-2]]))
        return flow.rhs(ext[:-2], ext[1:-1], ext[2:])
    du = np.zeros_like(u)
    du[1:-1] = flow.rhs(u[:-2], u[1:-1], u[2:])
    return du


def _finite(x, eps):
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(eps)


class _CornerSolver:
    """xi and the backward solve of E in doubles at fixed (alpha, beta)."""

    def __init__(self, eq: QuadEquation, alpha, beta, tol):
        env = {k: float(v) for k, v in eq.env(alpha, beta).items() if k not in CORNERS}
        fn = eq.expr.compile("float")
        self.fn = fn
        self.keep = {k: env[k] for k in fn.argnames if k not in CORNERS}
        self.used = [c for c in CORNERS if c in fn.argnames]
        self.tol = tol

    def E(self, u00, u10, u01, u11):
        vals = {"u00": u00, "u10": u10, "u01": u01, "u11": u11}
        return self.fn(**self.keep, **{c: vals[c] for c in self.used})

    def _root(self, slot, known, eps, n):
        args = dict(known)
        args[slot] = 0.0
        e0 = self.E(**args)
        args[slot] = 1.0
        den = self.E(**args) - e0
        if not abs(den) > self.tol:
            raise XiDegenerate(eps, n)
        return -e0 / den

    def up(self, un, un1, vn, eps, n):
        """v_{n+1} = xi(u_n, u_{n+1}, v_n)."""
        return self._root("u11", {"u00": un, "u10": un1, "u01": vn}, eps, n + 1)

    def down(self, un, un1, vn1, eps, n):
        """v_n from u_n, u_{n+1}, v_{n+1}."""
        return self._root("u01", {"u00": un, "u10": un1, "u11": vn1}, eps, n)


def _reconstruct(solver: _CornerSolver, lower, mu, anchor, eps):
    N = len(lower)
    v = np.empty(N)
    v[anchor] = mu
    for n in range(anchor, N - 1):
        v[n + 1] = solver.up(lower[n], lower[n + 1], v[n], eps, n)
    for n in range(anchor - 1, -1, -1):
        v[n] = solver.down(lower[n], lower[n + 1], v[n + 1], eps, n)
    _finite(v, eps)
    return v


def _neighbours(solver, lower, mu, a, eps):
    vp = solver.up(lower[a], lower[a + 1], mu, eps, a)
    vm = solver.down(lower[a - 1], lower[a], mu, eps, a - 1)
    return vm, vp


def _coupled_run(eq, flow: FloatFlow, u0, rungs, config: SimConfig):
    """RK4 for the seed and every rung's anchor value in the same stages.

    ``rungs`` is a list of dicts with keys beta, nu, perturbation.
    Returns the seed trajectory followed by one trajectory per rung.
    """
    u = np.array(u0, dtype=float)
    if u.shape != (config.N,):
        raise ConfigError(f"initial state has {u.size} sites, config says N = {config.N}")
    _finite(u, 0.0)
    a = config.anchor
    solvers = [_CornerSolver(eq, config.alpha, r["beta"], config.stencil_tol) for r in rungs]
    mus = np.array([float(r["nu"]) for r in rungs])
    kick = np.array([float(r.get("perturbation", 0.0)) for r in rungs])

    def lattices(u, mus, eps):
        out, lower = [], u
        for s, mu in zip(solvers, mus):
            lower = _reconstruct(s, lower, mu, a, eps)
            out.append(lower)
        return out

    def deriv(u, mus, eps):
        du = _lattice_rhs(flow, u, eps, config)
        dmu = np.empty_like(mus)
        lower = u
        for i, (s, mu) in enumerate(zip(solvers, mus)):
            vm, vp = _neighbours(s, lower, mu, a, eps)
            if not abs(vp - vm) > config.stencil_tol:
                raise StencilCollapse(eps, a)
            dmu[i] = flow.rhs(vm, mu, vp) + kick[i]
            if i + 1 < len(solvers):
                lower = _reconstruct(s, lower, mu, a, eps)
        return du, dmu

    h = config.h
    times = [0.0]
    seed_states = [u.copy()]
    rung_states = [[x] for x in lattices(u, mus, 0.0)]
    deriv(u, mus, 0.0)  # validates the initial stencils even for zero horizon
    for step in range(config.steps):
        eps = step * h
        k1u, k1m = deriv(u, mus, eps)
        k2u, k2m = deriv(u + h / 2 * k1u, mus + h / 2 * k1m, eps + h / 2)
        k3u, k3m = deriv(u + h / 2 * k2u, mus + h / 2 * k2m, eps + h / 2)
        k4u, k4m = deriv(u + h * k3u, mus + h * k3m, eps + h)
        u = u + h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        mus = mus + h / 6 * (k1m + 2 * k2m + 2 * k3m + k4m)
        t = (step + 1) * h
        _finite(u, t)
        _finite(mus, t)
        times.append(t)
        seed_states.append(u.copy())
        for store, lat in zip(rung_states, lattices(u, mus, t)):
            store.append(lat)

    origin = {"eq": eq, "u0": np.array(u0, dtype=float), "rungs": [], "config": config}
    seed = Trajectory(times, seed_states, flow, {"kind": "seed", "config": config.to_json()}, origin)
    out = [seed]
    for i, (r, states) in enumerate(zip(rungs, rung_states)):
        meta = {
            "kind": "baecklund",
            "rung": i + 1,
            "config": config.to_json(),
            "constants": [{"nu": float(x["nu"]), "beta": float(x["beta"])} for x in rungs[: i + 1]],
        }
        if r.get("perturbation"):
            meta["mu0_perturbation"] = float(r["perturbation"])
        o = dict(origin, rungs=list(rungs[: i + 1]))
        out.append(Trajectory(list(times), states, flow, meta, o))
    return out


def _eq_and_flow(eq, config: SimConfig, flow=None):
    if not isinstance(eq, QuadEquation):
        eq = build_equation(eq)
    if eq.elliptic:
        raise ConfigError("simulation needs an equation with scalar parameters (not Q4)")
    if flow is None:
        alpha, beta = Fraction(config.alpha), Fraction(config.beta0)
        flow = default_flow(eq)(alpha, beta).coeffs
    return eq, FloatFlow.of(flow)


def integrate_flow(flow, initial, config: SimConfig, eq=None) -> Trajectory:
    """Classical RK4 with the configured boundary rule."""
    return _coupled_run(eq, FloatFlow.of(flow), initial, [], config)[0]


def simulate_seed(eq, initial, config: SimConfig) -> Trajectory:
    """integrate_flow for the flow of ``eq`` at ``config.alpha``; remembers ``eq``."""
    eq, flow = _eq_and_flow(eq, config)
    return _coupled_run(eq, flow, initial, [], config)[0]


def backlund_extend(eq, trajectory: Trajectory, beta0, mu0, config: SimConfig | None = None, perturbation=0.0):
    """Trajectory of the neighbouring row u~ with u~_anchor = mu0 at eps = 0.

    The seed is re-integrated from its initial state together with mu0 so
    that both share RK4 stages.  ``perturbation`` is added to the mu0
    equation (a negative control: the row then fails to solve the flow).
    """
    config = config or trajectory.origin.get("config") or SimConfig()
    if not isinstance(eq, QuadEquation):
        eq = build_equation(eq)
    rungs = list(trajectory.origin.get("rungs", [])) + [
        {"beta": beta0, "nu": mu0, "perturbation": perturbation}
    ]
    # a Baecklund row restarts from its own seed, so the chain shares stages
    u0 = trajectory.origin.get("u0", trajectory.states[0])
    return _coupled_run(eq, trajectory.flow, u0, rungs, config)[-1]


def soliton_ladder(eq, seed: Trajectory, betas, nus, config: SimConfig | None = None) -> list:
    """Chain of M Baecklund rungs; returns [seed, rung 1, ..., rung M]."""
    if len(betas) != len(nus):
        raise ConfigError("need one seed constant per Baecklund parameter")
    if not betas:
        return [seed]
    config = config or seed.origin.get("config") or SimConfig()
    if not isinstance(eq, QuadEquation):
        eq = build_equation(eq)
    rungs = [{"beta": b, "nu": v} for b, v in zip(betas, nus)]
    u0 = seed.origin.get("u0", seed.states[0])
    out = _coupled_run(eq, seed.flow, u0, rungs, config)
    return out


def residual_xi(flow, trajectory: Trajectory, site: int, t_index: int) -> float:
    """du_k/deps by a five-point centered difference minus the flow at site k."""
    flow = FloatFlow.of(flow)
    T, N = len(trajectory.times), trajectory.N
    if not (1 <= site <= N - 2):
        raise InsufficientData(f"site {site} needs both neighbours")
    if not (2 <= t_index <= T - 3):
        raise InsufficientData(f"time index {t_index} needs two points on each side")
    s = trajectory.states
    dt = trajectory.times[t_index + 1] - trajectory.times[t_index]
    d = (-s[t_index + 2][site] + 8 * s[t_index + 1][site] - 8 * s[t_index - 1][site] + s[t_index - 2][site]) / (
        12 * dt
    )
    x = s[t_index]
    return float(d - flow.rhs(x[site - 1], x[site], x[site + 1]))


def residual_profile(trajectory: Trajectory, flow=None, sites=None) -> dict:
    """max |Xi| over time for each interior site."""
    flow = FloatFlow.of(flow or trajectory.flow)
    T, N = len(trajectory.times), trajectory.N
    if T < 5:
        raise InsufficientData("need at least five time points")
    sites = range(1, N - 1) if sites is None else sites
    arr = trajectory.array()
    dt = trajectory.times[1] - trajectory.times[0]
    d = (-arr[4:] + 8 * arr[3:-1] - 8 * arr[1:-3] + arr[:-4]) / (12 * dt)
    mid = arr[2:-2]
    out = {}
    for k in sites:
        f = flow.rhs(mid[:, k - 1], mid[:, k], mid[:, k + 1])
        out[k] = float(np.max(np.abs(d[:, k] - f)))
    return out


def max_residual(trajectory: Trajectory, flow=None) -> float:
    return max(residual_profile(trajectory, flow).values())


def self_convergence_ratio(flow, initial, config: SimConfig, eq=None) -> float:
    """|u_h - u_{h/2}| / |u_{h/2} - u_{h/4}| at the horizon; about 16 for RK4."""
    ends = []
    for k in range(3):
        cfg = replace(config, h=config.h / 2**k)
        ends.append(integrate_flow(flow, initial, cfg, eq).states[-1])
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    if e2 == 0:
        return math.inf
    return float(e1 / e2)


def geometric_seed(N: int, q: float = 1.2, scale: float = 1.0) -> np.ndarray:
    """u_n = scale * q**n: a regular initial state with distinct next-neighbours."""
    return scale * q ** np.arange(N, dtype=float)


def period_four_seed(N: int, c: float = 2.0) -> np.ndarray:
    """u = c, c, -c, -c, ...: u_{n+1} = -u_{n-1}, so no stencil collapses."""
    return c * np.resize(np.array([1.0, 1.0, -1.0, -1.0]), N)


def step_mobius(eq, alpha, beta, un, un1) -> np.ndarray:
    """Matrix of the Moebius map v_n -> v_{n+1} = xi(u_n, u_{n+1}, v_n)."""
    s = _CornerSolver(eq, alpha, beta, 0.0)
    D = s.E(un, un1, 0.0, 0.0)
    B = s.E(un, un1, 1.0, 0.0) - D
    C = s.E(un, un1, 0.0, 1.0) - D
    A = s.E(un, un1, 1.0, 1.0) - D - B - C
    return np.array([[-B, -D], [A, C]])


def monodromy_fixed_points(eq, u, alpha, beta, start: int, period: int) -> list:
    """Fixed points of the composed map over ``period`` sites from ``start``,
    paired with its derivative there (|derivative| > 1 means repelling)."""
    if not isinstance(eq, QuadEquation):
        eq = build_equation(eq)
    M = np.eye(2)
    for n in range(start, start + period):
        M = step_mobius(eq, alpha, beta, u[n], u[n + 1]) @ M
    ev, V = np.linalg.eig(M)
    out = []
    for i in range(2):
        if abs(V[1, i]) < 1e-300 or abs(np.imag(ev[i])) > 0:
            continue
        out.append((float(np.real(V[0, i] / V[1, i])), float(np.real(ev[1 - i] / ev[i]))))
    return out

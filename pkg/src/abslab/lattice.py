"""Finite lattice patches and the affine-linear vertex solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import DegenerateCorner
from .field import is_zero, to_json_value

# position of each corner in the argument list of E
_SLOT = {"u00": 0, "u10": 1, "u01": 2, "u11": 3}


def solve_vertex(eq, target: str, known: Mapping, alpha, beta, site=None):
    """Solve E = 0 for the corner ``target`` given the other three.

    E is affine in each corner, so the root is ``-E(t=0) / (E(t=1) - E(t=0))``.
    Works for Jets too, which gives the partials of the solution map.
    """
    E = _corner_fn(eq, alpha, beta)
    args = [None] * 4
    for name, v in known.items():
        args[_SLOT[name]] = Fraction(v) if type(v) is int else v
    i = _SLOT[target]
    args[i] = 0
    e0 = E(*args)
    args[i] = 1
    e1 = E(*args)
    den = e1 - e0
    if is_zero(den):
        raise DegenerateCorner(f"coefficient of {target} vanishes", site)
    return -e0 / den


def _corner_fn(eq, alpha, beta):
    cache = eq.__dict__.setdefault("_corner_cache", {})
    key = (alpha, beta)
    fn = cache.get(key)
    if fn is None:
        if len(cache) > 256:
            cache.clear()
        fn = cache[key] = eq.corner_function(alpha, beta)
    return fn


def solve_corner(eq, u00, u10, u01, alpha, beta, site=None):
    """u11 = xi(u00, u10, u01; alpha, beta)."""
    return solve_vertex(eq, "u11", {"u00": u00, "u10": u10, "u01": u01}, alpha, beta, site)


def solve_edge(eq, u00, u10, u11, alpha, beta, site=None):
    """u01 = zeta(u00, u10, u11; alpha, beta)."""
    return solve_vertex(eq, "u01", {"u00": u00, "u10": u10, "u11": u11}, alpha, beta, site)


def residual(eq, u00, u10, u01, u11, alpha, beta):
    return _corner_fn(eq, alpha, beta)(u00, u10, u01, u11)


@dataclass(frozen=True)
class ParameterSequence:
    """alpha_n along n, beta_m along m; each either a constant or a mapping."""

    alpha: object
    beta: object

    @property
    def alpha_constant(self) -> bool:
        return not isinstance(self.alpha, Mapping)

    @property
    def beta_constant(self) -> bool:
        return not isinstance(self.beta, Mapping)

    def alpha_at(self, n):
        return self.alpha[n] if isinstance(self.alpha, Mapping) else self.alpha

    def beta_at(self, m):
        return self.beta[m] if isinstance(self.beta, Mapping) else self.beta

    @classmethod
    def rows(cls, alpha, betas, start: int = 0):
        """Constant alpha with beta_m = betas[m - start]."""
        return cls(alpha, {start + i: b for i, b in enumerate(betas)})

    def to_json(self):
        def enc(p):
            if isinstance(p, Mapping):
                return {str(k): _enc_param(v) for k, v in sorted(p.items())}
            return _enc_param(p)

        return {"alpha": enc(self.alpha), "beta": enc(self.beta)}


def _enc_param(p):
    return p.to_json() if hasattr(p, "to_json") and not hasattr(p, "tower") else to_json_value(p)


@dataclass
class CrossData:
    """Values on the two axes through (0, 0); the origin is stored once."""

    horizontal: dict  # k -> u_{k,0}
    vertical: dict  # l -> u_{0,l}

    def __post_init__(self):
        self.horizontal = dict(self.horizontal)
        self.vertical = dict(self.vertical)
        if 0 in self.horizontal and 0 in self.vertical:
            if self.horizontal[0] != self.vertical[0]:
                raise ValueError("horizontal and vertical data disagree at the origin")
        origin = self.horizontal.get(0, self.vertical.get(0))
        if origin is None:
            raise ValueError("cross data needs u_{0,0}")
        self.horizontal[0] = origin
        self.vertical.pop(0, None)
        for keys in (self.horizontal, set(self.vertical) | {0}):
            ks = sorted(keys)
            if ks != list(range(ks[0], ks[-1] + 1)):
                raise ValueError("cross data must be contiguous")

    @classmethod
    def from_lists(cls, horizontal, vertical, h_start: int = 0, v_start: int = 0):
        h = {h_start + i: v for i, v in enumerate(horizontal)}
        v = {v_start + i: x for i, x in enumerate(vertical)}
        if 0 not in h:
            raise ValueError("horizontal data must contain k = 0")
        if v_start == 0 and v:
            if v[0] != h[0]:
                raise ValueError("horizontal and vertical data disagree at the origin")
        return cls(h, v)

    @property
    def n_range(self):
        return min(self.horizontal), max(self.horizontal)

    @property
    def m_range(self):
        ks = set(self.vertical) | {0}
        return min(ks), max(ks)

    def check_three_point(self):
        """Adjacent-but-one horizontal values must differ (three-point flows)."""
        for k in self.horizontal:
            if k - 1 in self.horizontal and k + 1 in self.horizontal:
                if self.horizontal[k + 1] == self.horizontal[k - 1]:
                    from .errors import DegenerateStencil

                    raise DegenerateStencil(f"u_{{{k + 1},0}} = u_{{{k - 1},0}}")


@dataclass
class LatticePatch:
    values: dict  # (n, m) -> value
    params: ParameterSequence
    equation: object = None

    def __getitem__(self, site):
        return self.values[site]

    @property
    def n_range(self):
        ns = [n for n, _ in self.values]
        return min(ns), max(ns)

    @property
    def m_range(self):
        ms = [m for _, m in self.values]
        return min(ms), max(ms)

    def squares(self):
        v = self.values
        for (n, m) in sorted(v):
            if (n + 1, m) in v and (n, m + 1) in v and (n + 1, m + 1) in v:
                yield n, m

    def residuals(self, eq=None) -> dict:
        eq = eq or self.equation
        v = self.values
        out = {}
        for n, m in self.squares():
            out[(n, m)] = residual(
                eq,
                v[(n, m)],
                v[(n + 1, m)],
                v[(n, m + 1)],
                v[(n + 1, m + 1)],
                self.params.alpha_at(n),
                self.params.beta_at(m),
            )
        return out

    def max_abs_residual(self, eq=None):
        return max((abs(float(r)) for r in self.residuals(eq).values()), default=0.0)

    def to_json(self):
        return {
            "equation": getattr(self.equation, "name", None),
            "params": self.params.to_json(),
            "values": [
                {"n": n, "m": m, "value": to_json_value(val)} for (n, m), val in sorted(self.values.items())
            ],
        }


def extend_patch(eq, cross: CrossData, params: ParameterSequence) -> LatticePatch:
    """Fill the rectangle spanned by the cross, quadrant by quadrant."""
    v = {(k, 0): x for k, x in cross.horizontal.items()}
    v.update({(0, l): x for l, x in cross.vertical.items()})
    n0, n1 = cross.n_range
    m0, m1 = cross.m_range
    A, B = params.alpha_at, params.beta_at

    # (+,+): unknown u11 of square (n, m)
    for m in range(0, m1):
        for n in range(0, n1):
            v[(n + 1, m + 1)] = solve_vertex(
                eq, "u11", {"u00": v[(n, m)], "u10": v[(n + 1, m)], "u01": v[(n, m + 1)]}, A(n), B(m), (n + 1, m + 1)
            )
    # (-,+): unknown u01, sweep n downward
    for m in range(0, m1):
        for n in range(-1, n0 - 1, -1):
            v[(n, m + 1)] = solve_vertex(
                eq, "u01", {"u00": v[(n, m)], "u10": v[(n + 1, m)], "u11": v[(n + 1, m + 1)]}, A(n), B(m), (n, m + 1)
            )
    # (+,-): unknown u10, sweep m downward
    for m in range(-1, m0 - 1, -1):
        for n in range(0, n1):
            v[(n + 1, m)] = solve_vertex(
                eq, "u10", {"u00": v[(n, m)], "u01": v[(n, m + 1)], "u11": v[(n + 1, m + 1)]}, A(n), B(m), (n + 1, m)
            )
    # (-,-): unknown u00
    for m in range(-1, m0 - 1, -1):
        for n in range(-1, n0 - 1, -1):
            v[(n, m)] = solve_vertex(
                eq, "u00", {"u10": v[(n + 1, m)], "u01": v[(n, m + 1)], "u11": v[(n + 1, m + 1)]}, A(n), B(m), (n, m)
            )
    return LatticePatch(v, params, eq)

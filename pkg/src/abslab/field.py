"""Exact scalars: rationals and square-root towers over them.

Rationals are plain :class:`fractions.Fraction` values.  A :class:`Tower`
adjoins successive square roots ``r_i`` with ``r_i**2 = d_i`` where ``d_i``
lives in the tower below.  Elements of a depth-``k`` tower are stored as
``2**k`` rational coordinates indexed by bitmask: bit ``i`` set means the
monomial contains ``r_i``.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .errors import DepthExceeded, DivisionByZero, NotSquareFree

MAX_DEPTH = 4

_ZERO = Fraction(0)
_ONE = Fraction(1)


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a rational, or None if it is not a square."""
    x = Fraction(x)
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = isqrt(p), isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


# Coordinate-tuple kernels.  ``sq`` holds the defining squares as coordinate
# tuples: sq[i] has length 2**i.


def _is_zero(x):
    return not any(x)


def _add(x, y):
    return tuple(a + b for a, b in zip(x, y))


def _sub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def _scale(x, c):
    return tuple(a * c for a in x)


def _mul(x, y, sq, k):
    if k == 0:
        return (x[0] * y[0],)
    h = 1 << (k - 1)
    x0, x1 = x[:h], x[h:]
    y0, y1 = y[:h], y[h:]
    x1z, y1z = _is_zero(x1), _is_zero(y1)
    lo = _mul(x0, y0, sq, k - 1)
    if x1z and y1z:
        return lo + (_ZERO,) * h
    if x1z:
        return lo + _mul(x0, y1, sq, k - 1)
    if y1z:
        return lo + _mul(x1, y0, sq, k - 1)
    top = _mul(x1, y1, sq, k - 1)
    lo = _add(lo, _mul(sq[k - 1], top, sq, k - 1))
    hi = _add(_mul(x0, y1, sq, k - 1), _mul(x1, y0, sq, k - 1))
    return lo + hi


def _inv(x, sq, k):
    if k == 0:
        if x[0] == 0:
            raise DivisionByZero("division by zero")
        return (1 / x[0],)
    h = 1 << (k - 1)
    x0, x1 = x[:h], x[h:]
    if _is_zero(x1):
        return _inv(x0, sq, k - 1) + (_ZERO,) * h
    norm = _sub(_mul(x0, x0, sq, k - 1), _mul(sq[k - 1], _mul(x1, x1, sq, k - 1), sq, k - 1))
    if _is_zero(norm):
        raise NotSquareFree("nonzero element with zero norm: an adjoined value is a square")
    ninv = _inv(norm, sq, k - 1)
    return _mul(x0, ninv, sq, k - 1) + tuple(-c for c in _mul(x1, ninv, sq, k - 1))


def _sqrt(x, sq, k):
    if k == 0:
        r = rational_sqrt(x[0])
        return None if r is None else (r,)
    h = 1 << (k - 1)
    x0, x1 = x[:h], x[h:]
    zeros = (_ZERO,) * h
    if _is_zero(x1):
        s = _sqrt(x0, sq, k - 1)
        if s is not None:
            return s + zeros
        # sqrt(x0) = t * r_top  with  t**2 = x0 / d
        t = _sqrt(_mul(x0, _inv(sq[k - 1], sq, k - 1), sq, k - 1), sq, k - 1)
        return None if t is None else zeros + t
    norm = _sub(_mul(x0, x0, sq, k - 1), _mul(sq[k - 1], _mul(x1, x1, sq, k - 1), sq, k - 1))
    root_norm = _sqrt(norm, sq, k - 1)
    if root_norm is None:
        return None
    half = Fraction(1, 2)
    for sign in (1, -1):
        p2 = _scale(_add(x0, _scale(root_norm, sign)), half)
        p = _sqrt(p2, sq, k - 1)
        if p is not None and not _is_zero(p):
            q = _mul(_scale(x1, half), _inv(p, sq, k - 1), sq, k - 1)
            return p + q
    return None


class Tower:
    """The field Q(r_0, ..., r_{k-1}) with r_i**2 = d_i in the field below."""

    __slots__ = ("names", "_squares")

    def __init__(self, names=(), squares=()):
        self.names = tuple(names)
        self._squares = tuple(squares)

    @property
    def depth(self) -> int:
        return len(self.names)

    @property
    def squares(self):
        """Defining values d_i as field elements of the tower below r_i."""
        out = []
        for i, coords in enumerate(self._squares):
            sub = Tower(self.names[:i], self._squares[:i])
            out.append(sub._wrap(coords))
        return tuple(out)

    def __eq__(self, other):
        return (
            isinstance(other, Tower)
            and self.names == other.names
            and self._squares == other._squares
        )

    def __hash__(self):
        return hash((self.names, self._squares))

    def __repr__(self):
        parts = [f"{n}^2={_fmt_coords(self._squares[i], self.names[:i])}" for i, n in enumerate(self.names)]
        return f"Tower({', '.join(parts)})" if parts else "Tower(Q)"

    def is_prefix_of(self, other: "Tower") -> bool:
        k = self.depth
        return other.names[:k] == self.names and other._squares[:k] == self._squares

    def _wrap(self, coords):
        if self.depth == 0:
            return coords[0]
        return FieldElement(self, coords)

    def coords(self, x) -> tuple:
        """Coordinates of ``x`` (rational or element of a prefix tower) in this tower."""
        n = 1 << self.depth
        if isinstance(x, FieldElement):
            if x.tower == self:
                return x.coords
            if not x.tower.is_prefix_of(self):
                raise TypeError(f"{x.tower!r} does not embed into {self!r}")
            return x.coords + (_ZERO,) * (n - len(x.coords))
        return (Fraction(x),) + (_ZERO,) * (n - 1)

    def embed(self, x):
        return self._wrap(self.coords(x))

    def gen(self, i: int = -1):
        """The adjoined square root r_i (default: the top one)."""
        if self.depth == 0:
            raise IndexError("the rationals have no adjoined symbols")
        i %= self.depth
        coords = [_ZERO] * (1 << self.depth)
        coords[1 << i] = _ONE
        return FieldElement(self, tuple(coords))

    def adjoin(self, d, name: str | None = None) -> "Tower":
        """Adjoin a square root of ``d``; raises if ``d`` is zero or already a square."""
        if self.depth >= MAX_DEPTH:
            raise DepthExceeded(f"tower depth is limited to {MAX_DEPTH}")
        coords = self.coords(d)
        if _is_zero(coords):
            raise ValueError("cannot adjoin the square root of zero")
        if _sqrt(coords, self._squares, self.depth) is not None:
            raise NotSquareFree("value is already a square in this tower")
        if name is None:
            k = self.depth
            while f"r{k}" in self.names:
                k += 1
            name = f"r{k}"
        if name in self.names:
            raise ValueError(f"symbol {name!r} already adjoined")
        return Tower(self.names + (name,), self._squares + (coords,))

    def sqrt(self, x):
        """Exact square root of ``x`` inside this tower, or None."""
        root = _sqrt(self.coords(x), self._squares, self.depth)
        return None if root is None else self._wrap(root)

    def sqrt_or_adjoin(self, d, name: str | None = None):
        """Return ``(tower, root)``, adjoining a new symbol only when needed."""
        root = self.sqrt(d)
        if root is not None:
            return self, root
        tower = self.adjoin(d, name)
        return tower, tower.gen()


QQ = Tower()


def adjoin_sqrt(tower: Tower, d, name: str | None = None) -> Tower:
    return tower.adjoin(d, name)


def tower_of(*values) -> Tower:
    """The largest tower among ``values`` (rationals live in QQ)."""
    best = QQ
    for v in values:
        t = getattr(v, "tower", None)
        if t is None:
            continue
        if best.is_prefix_of(t):
            best = t
        elif not t.is_prefix_of(best):
            raise TypeError(f"incompatible towers {best!r} and {t!r}")
    return best


def _fmt_coords(coords, names):
    terms = []
    for mask, c in enumerate(coords):
        if c == 0:
            continue
        mono = "*".join(n for i, n in enumerate(names) if mask >> i & 1)
        terms.append(f"{c}" if not mono else (mono if c == 1 else f"{c}*{mono}"))
    return " + ".join(terms) if terms else "0"


def monomial_name(mask: int, names) -> str:
    mono = "*".join(n for i, n in enumerate(names) if mask >> i & 1)
    return mono or "1"


class FieldElement:
    """Immutable element of a square-root tower."""

    __slots__ = ("tower", "coords")

    def __init__(self, tower: Tower, coords):
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != 1 << tower.depth:
            raise ValueError("coordinate count does not match tower depth")
        self.tower = tower
        self.coords = coords

    # coercion -----------------------------------------------------------
    def _pair(self, other):
        if isinstance(other, FieldElement):
            if other.tower == self.tower:
                return self.tower, self.coords, other.coords
            t = tower_of(self, other)
            return t, t.coords(self), t.coords(other)
        if isinstance(other, (int, Fraction)):
            return self.tower, self.coords, self.tower.coords(other)
        return None

    def _make(self, tower, coords):
        return tower._wrap(coords)

    def __add__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, x, y = p
        return self._make(t, _add(x, y))

    __radd__ = __add__

    def __sub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, x, y = p
        return self._make(t, _sub(x, y))

    def __rsub__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, x, y = p
        return self._make(t, _sub(y, x))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._make(self.tower, _scale(self.coords, other))
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, x, y = p
        return self._make(t, _mul(x, y, t._squares, t.depth))

    __rmul__ = __mul__

    def inverse(self):
        t = self.tower
        return self._make(t, _inv(self.coords, t._squares, t.depth))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return self._make(self.tower, _scale(self.coords, 1 / Fraction(other)))
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, x, y = p
        return self._make(t, _mul(x, _inv(y, t._squares, t.depth), t._squares, t.depth))

    def __rtruediv__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        t, x, y = p
        return self._make(t, _mul(y, _inv(x, t._squares, t.depth), t._squares, t.depth))

    def __neg__(self):
        return FieldElement(self.tower, tuple(-c for c in self.coords))

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        result = self.tower.embed(1)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        p = self._pair(other)
        if p is None:
            return NotImplemented
        _, x, y = p
        return x == y

    def __hash__(self):
        coords = list(self.coords)
        while len(coords) > 1 and coords[-1] == 0:
            coords.pop()
        if len(coords) == 1:
            return hash(coords[0])
        return hash(tuple(coords))

    def __bool__(self):
        return not _is_zero(self.coords)

    def is_rational(self) -> bool:
        return _is_zero(self.coords[1:])

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return self.coords[0]

    def __float__(self):
        # numeric value choosing the positive branch of every root
        vals = []
        for i, d in enumerate(self.tower.squares):
            dv = float(d) if not isinstance(d, FieldElement) else d._float_with(vals)
            vals.append(dv ** 0.5)
        return self._float_with(vals)

    def _float_with(self, roots):
        total = 0.0
        for mask, c in enumerate(self.coords):
            if c == 0:
                continue
            term = float(c)
            for i in range(len(roots)):
                if mask >> i & 1:
                    term *= roots[i]
            total += term
        return total

    def __repr__(self):
        return f"FieldElement({_fmt_coords(self.coords, self.tower.names)})"

    __str__ = __repr__

    def to_json(self) -> dict:
        return {
            monomial_name(mask, self.tower.names): f"{c.numerator}/{c.denominator}"
            for mask, c in enumerate(self.coords)
            if c != 0
        } or {"1": "0/1"}


def is_zero(x) -> bool:
    """Zero test that sees through Jets and tower elements."""
    x = getattr(x, "value", x)
    return x == 0


def to_json_value(x):
    """Serialize an exact scalar: rationals as "p/q", tower elements as monomial maps."""
    if isinstance(x, FieldElement):
        if x.is_rational():
            x = x.coords[0]
        else:
            return x.to_json()
    if isinstance(x, int):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return x
    return str(x)


def parse_rational(text: str) -> Fraction:
    """Parse "p/q", an integer, or a decimal literal exactly."""
    return Fraction(text.strip())

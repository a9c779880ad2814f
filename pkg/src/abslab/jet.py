"""First-order forward-mode derivatives over exact scalars."""

from __future__ import annotations

from fractions import Fraction


class Jet:
    """A value together with its partial derivatives.

    ``partials`` maps a variable key to the exact derivative; missing keys
    mean zero.  The scalar type is whatever the value is (Fraction,
    FieldElement, float), so the chain rule stays exact.
    """

    __slots__ = ("value", "partials")

    def __init__(self, value, partials=None):
        self.value = value
        self.partials = dict(partials or {})

    @classmethod
    def variable(cls, value, key):
        return cls(value, {key: 1})

    def d(self, key):
        return self.partials.get(key, 0)

    @staticmethod
    def _lift(x):
        return x if isinstance(x, Jet) else Jet(x)

    def _combine(self, other, fa, fb):
        # partials of a*fa + b*fb
        out = {}
        for k, v in self.partials.items():
            out[k] = v * fa if fa is not None else v
        for k, v in other.partials.items():
            term = v * fb if fb is not None else v
            out[k] = out[k] + term if k in out else term
        return out

    def __add__(self, other):
        if not isinstance(other, Jet):
            if not _is_scalar(other):
                return NotImplemented
            return Jet(self.value + other, self.partials)
        return Jet(self.value + other.value, self._combine(other, None, None))

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, {k: -v for k, v in self.partials.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        if not isinstance(other, Jet):
            if not _is_scalar(other):
                return NotImplemented
            return Jet(self.value - other, self.partials)
        return self + (-other)

    def __rsub__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            if not _is_scalar(other):
                return NotImplemented
            return Jet(self.value * other, {k: v * other for k, v in self.partials.items()})
        return Jet(self.value * other.value, self._combine(other, other.value, self.value))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if not _is_scalar(other):
                return NotImplemented
            inv = 1 / other
            return Jet(self.value * inv, {k: v * inv for k, v in self.partials.items()})
        inv = 1 / other.value
        q = self.value * inv
        out = {k: v * inv for k, v in self.partials.items()}
        for k, v in other.partials.items():
            term = -(q * v * inv)
            out[k] = out[k] + term if k in out else term
        return Jet(q, out)

    def __rtruediv__(self, other):
        if not _is_scalar(other):
            return NotImplemented
        return Jet(other) / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return Jet(self.value ** 0 if not isinstance(self.value, Fraction) else Fraction(1))
        lower = self.value ** (n - 1)
        scale = lower * n
        return Jet(lower * self.value, {k: v * scale for k, v in self.partials.items()})

    def __repr__(self):
        return f"Jet({self.value!r}, {self.partials!r})"


def _is_scalar(x):
    return not isinstance(x, Jet) and (
        isinstance(x, (int, float, Fraction)) or hasattr(x, "tower") or hasattr(x, "__array__")
    )


def value_of(x):
    return x.value if isinstance(x, Jet) else x


def partial(x, key):
    return x.partials.get(key, 0) if isinstance(x, Jet) else 0

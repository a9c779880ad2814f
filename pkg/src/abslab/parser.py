"""Text input for quad equations.

Grammar (``#`` starts a comment, newlines are whitespace)::

    source := expr [ "=" expr ]
    expr   := term { ("+" | "-") term }
    term   := unary { ("*" | "/") unary }
    unary  := ("+" | "-") unary | power
    power  := atom [ "^" ["-"] INTEGER ]
    atom   := NUMBER | NAME | "(" expr ")"

Names are the corners u00 u10 u01 u11 and the parameters alpha beta delta
g2 g3.  Denominators are cleared, so the equation is ``numerator = 0``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .catalog import ALPHA, BETA, CATALOG, CORNERS, DELTA, G2, G3, U00, U01, U10, U11, build_equation, user_equation
from .errors import NotAffineLinear, ParseError, UnknownEquation
from .expr import Add, Const, Div, Expr, Mul, Pow, Sym, add, mul, power

NAMES = ("u00", "u10", "u01", "u11", "alpha", "beta", "delta", "g2", "g3")
_SYMS = dict(zip(NAMES, (U00, U10, U01, U11, ALPHA, BETA, DELTA, G2, G3)))
_INDEX = {n: i for i, n in enumerate(NAMES)}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()=])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    out = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("end", "", line, pos - start + 1))
    return out


# sparse polynomials over NAMES ----------------------------------------------


class Poly:
    """Polynomial with Fraction coefficients, monomials as exponent tuples."""

    __slots__ = ("terms",)
    _ZERO_EXP = (0,) * len(NAMES)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c):
        return cls({cls._ZERO_EXP: Fraction(c)})

    @classmethod
    def symbol(cls, name):
        e = [0] * len(NAMES)
        e[_INDEX[name]] = 1
        return cls({tuple(e): Fraction(1)})

    def __add__(self, other):
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(t)

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                t[m] = t.get(m, 0) + c1 * c2
        return Poly(t)

    def scale(self, k):
        return Poly({m: c * k for m, c in self.terms.items()})

    def __pow__(self, n: int):
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def degree_in(self, name) -> int:
        i = _INDEX[name]
        return max((m[i] for m in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def leading(self):
        m = max(self.terms)
        return self.terms[m]

    def monic(self):
        return self.scale(1 / self.leading()) if self.terms else self

    def subs_const(self, name, value):
        i = _INDEX[name]
        t = {}
        for m, c in self.terms.items():
            k = m[:i] + (0,) + m[i + 1 :]
            t[k] = t.get(k, 0) + c * Fraction(value) ** m[i]
        return Poly(t)

    def to_expr(self) -> Expr:
        parts = []
        for m in sorted(self.terms, reverse=True):
            factors = [Const(self.terms[m])]
            factors += [power(_SYMS[n], k) for n, k in zip(NAMES, m) if k]
            parts.append(mul(*factors))
        return add(*parts) if parts else Const(0)


@dataclass
class Rational:
    num: Poly
    den: Poly

    def __add__(self, o):
        return Rational(self.num * o.den + o.num * self.den, self.den * o.den)

    def __sub__(self, o):
        return Rational(self.num * o.den - o.num * self.den, self.den * o.den)

    def __mul__(self, o):
        return Rational(self.num * o.num, self.den * o.den)

    def __neg__(self):
        return Rational(-self.num, self.den)


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.open = []  # unclosed "(" tokens

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        if tok.kind == "end" and self.open:
            tok = self.open[-1]
            msg = "unclosed '('"
        raise ParseError(msg, tok.line, tok.column)

    def take(self, text=None, kind=None):
        t = self.tok
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text else kind
            self.fail(f"expected {want}, found {t.text!r}" if t.kind != "end" else f"expected {want} before end of input")
        self.i += 1
        return t

    def source(self) -> Rational:
        lhs = self.expr()
        if self.tok.text == "=":
            self.i += 1
            lhs = lhs - self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return lhs

    def expr(self):
        val = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                val = val * rhs
            else:
                if not rhs.num:
                    self.fail("division by zero", op)
                val = Rational(val.num * rhs.den, val.den * rhs.num)
        return val

    def unary(self):
        if self.tok.text == "-":
            self.i += 1
            return -self.unary()
        if self.tok.text == "+":
            self.i += 1
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            caret = self.take()
            sign = 1
            if self.tok.text == "-":
                self.i += 1
                sign = -1
            if self.tok.kind != "num" or not self.tok.text.isdigit():
                self.fail("exponent must be an integer literal")
            n = int(self.take().text)
            if sign < 0:
                if not base.num:
                    self.fail("zero to a negative power", caret)
                base = Rational(base.den, base.num)
            base = Rational(base.num**n, base.den**n)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Rational(Poly.const(Fraction(t.text)), Poly.const(1))
        if t.kind == "name":
            if t.text not in _INDEX:
                self.fail(f"unknown symbol {t.text!r}")
            self.i += 1
            return Rational(Poly.symbol(t.text), Poly.const(1))
        if t.text == "(":
            self.i += 1
            self.open.append(t)
            val = self.expr()
            self.take(")")
            self.open.pop()
            return val
        if t.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {t.text!r}")


def parse_polynomial(text: str) -> Poly:
    """Numerator of the parsed equation, with content divided out of constants."""
    r = _Parser(text).source()
    num = r.num
    if r.den.is_constant():
        num = num.scale(1 / r.den.leading())
    return num


def check_poly_affine(p: Poly):
    for c in CORNERS:
        if p.degree_in(c) > 1:
            raise NotAffineLinear(c)


def expr_to_rational(e: Expr) -> Rational:
    """Expand an expression tree into numerator and denominator polynomials."""
    memo = {}
    one = Poly.const(1)

    def go(x):
        key = id(x)
        if key in memo:
            return memo[key]
        if isinstance(x, Const):
            out = Rational(Poly.const(x.value), one)
        elif isinstance(x, Sym):
            if x.name not in _INDEX:
                raise UnknownEquation(f"symbol {x.name} has no text form")
            out = Rational(Poly.symbol(x.name), one)
        elif isinstance(x, Add):
            out = Rational(Poly(), one)
            for a in x.terms:
                out = out + go(a)
        elif isinstance(x, Mul):
            out = Rational(one, one)
            for a in x.factors:
                out = out * go(a)
        elif isinstance(x, Pow):
            r = go(x.base)
            out = Rational(r.num**x.exp, r.den**x.exp) if x.exp >= 0 else Rational(r.den**-x.exp, r.num**-x.exp)
        elif isinstance(x, Div):
            n, d = go(x.num), go(x.den)
            out = Rational(n.num * d.den, n.den * d.num)
        else:
            raise TypeError(type(x))
        memo[key] = out
        return out

    return go(e)


def recognize(p: Poly, delta=None):
    """(catalog name, k) with p = k * E_name for a rational constant k, or None.

    For an E printed with a parameter denominator D, p = k * D * E_name also
    counts; the factor is then reported as the string "k*D".
    """
    for name in CATALOG:
        if name == "Q4":
            continue
        ref = expr_to_rational(build_equation(name, delta=delta).expr)
        if p.degree_in("delta") == 0:
            value = 1 if delta is None else delta
            ref = Rational(ref.num.subs_const("delta", value), ref.den.subs_const("delta", value))
        k = _constant_ratio(p * ref.den, ref.num)
        if k is not None:
            return name, k
        if not ref.den.is_constant():
            k = _constant_ratio(p, ref.num)
            if k is not None:
                return name, f"{k}*D"
    return None


def _constant_ratio(a: Poly, b: Poly):
    if not a or not b or set(a.terms) != set(b.terms):
        return None
    k = a.leading() / b.leading()
    return k if a == b.scale(k) else None


def parse_equation(text: str, delta=None, g2=None, g3=None, prefer_catalog: bool = True):
    """Parse, clear denominators, check affine-linearity.

    With ``prefer_catalog`` an exact match (factor 1, or the catalog's own
    parameter denominator once cleared) returns the catalog equation itself,
    so reports match byte for byte.
    """
    p = parse_polynomial(text)
    if not p:
        raise NotAffineLinear("u00 (equation is identically zero)")
    check_poly_affine(p)
    if prefer_catalog:
        hit = recognize(p, delta)
        if hit is not None and hit[1] in (1, "1*D"):
            return build_equation(hit[0], delta=delta)
    return user_equation(p.to_expr(), delta=delta, g2=g2, g3=g3)

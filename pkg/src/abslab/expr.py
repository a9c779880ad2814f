"""Expression trees for polynomial and rational formulas.

Trees are immutable and hash-consed only structurally (equal trees compare
equal).  Evaluation goes through a compiled straight-line Python function
with common subexpressions shared, so the same tree evaluates over
Fractions, tower elements, Jets, floats or numpy arrays alike.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping

from .errors import DivisionByZero, MissingSymbol


class Expr:
    __slots__ = ("_hash", "_compiled", "_free")

    # construction helpers ----------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    def __hash__(self):
        return self._hash

    # analysis ------------------------------------------------------------
    def free_symbols(self) -> frozenset:
        cached = getattr(self, "_free", None)
        if cached is None:
            if isinstance(self, Sym):
                cached = frozenset((self.name,))
            else:
                cached = frozenset().union(*(c.free_symbols() for c in self.children()))
            self._free = cached
        return cached

    def children(self):
        return ()

    def diff(self, name: str) -> "Expr":
        return _diff(self, name, {})

    def subs(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        """Simultaneous substitution of symbols by expressions."""
        mapping = {k: as_expr(v) for k, v in mapping.items()}
        return _subs(self, mapping, {})

    # evaluation ----------------------------------------------------------
    def compile(self, mode: str = "exact") -> Callable:
        """Straight-line function taking keyword arguments for the free symbols.

        ``mode="float"`` bakes constants in as floats.
        """
        cache = getattr(self, "_compiled", None)
        if cache is None:
            cache = self._compiled = {}
        if mode not in cache:
            cache[mode] = _compile(self, mode)
        return cache[mode]

    def evaluate(self, env: Mapping):
        fn = self.compile()
        try:
            return fn(**{name: env[name] for name in fn.argnames})
        except KeyError:
            missing = sorted(n for n in fn.argnames if n not in env)
            raise MissingSymbol(missing) from None
        except ZeroDivisionError as exc:
            if isinstance(exc, DivisionByZero):
                raise
            raise DivisionByZero(str(exc)) from None

    def __repr__(self):
        return to_string(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)
        self._hash = hash(("c", self.value))

    def __eq__(self, other):
        return isinstance(other, Const) and self.value == other.value

    __hash__ = Expr.__hash__


class Sym(Expr):
    """A named symbol; ``kind`` is 'var', 'param' or 'surd'."""

    __slots__ = ("name", "kind")

    def __init__(self, name: str, kind: str = "var"):
        if not name.isidentifier():
            raise ValueError(f"symbol name must be an identifier: {name!r}")
        self.name = name
        self.kind = kind
        self._hash = hash(("s", name))

    def __eq__(self, other):
        return isinstance(other, Sym) and self.name == other.name

    __hash__ = Expr.__hash__


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        self._hash = hash(("+",) + self.terms)

    def children(self):
        return self.terms

    def __eq__(self, other):
        return isinstance(other, Add) and self._hash == other._hash and self.terms == other.terms

    __hash__ = Expr.__hash__


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        self._hash = hash(("*",) + self.factors)

    def children(self):
        return self.factors

    def __eq__(self, other):
        return isinstance(other, Mul) and self._hash == other._hash and self.factors == other.factors

    __hash__ = Expr.__hash__


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den
        self._hash = hash(("/", num, den))

    def children(self):
        return (self.num, self.den)

    def __eq__(self, other):
        return isinstance(other, Div) and self.num == other.num and self.den == other.den

    __hash__ = Expr.__hash__


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp: int):
        self.base = base
        self.exp = exp
        self._hash = hash(("^", base, exp))

    def children(self):
        return (self.base,)

    def __eq__(self, other):
        return isinstance(other, Pow) and self.exp == other.exp and self.base == other.base

    __hash__ = Expr.__hash__


ZERO = Const(0)
ONE = Const(1)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Const(x)
    if isinstance(x, str):
        return Sym(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def var(name: str) -> Sym:
    return Sym(name, "var")


def param(name: str) -> Sym:
    return Sym(name, "param")


def surd(name: str) -> Sym:
    return Sym(name, "surd")


def symbols(names: str, kind: str = "var"):
    return tuple(Sym(n, kind) for n in names.split())


# smart constructors ---------------------------------------------------


def add(*args) -> Expr:
    terms = []
    const = Fraction(0)
    for a in args:
        a = as_expr(a)
        parts = a.terms if isinstance(a, Add) else (a,)
        for p in parts:
            if isinstance(p, Const):
                const += p.value
            else:
                terms.append(p)
    if const != 0:
        terms.append(Const(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


def mul(*args) -> Expr:
    factors = []
    const = Fraction(1)
    for a in args:
        a = as_expr(a)
        parts = a.factors if isinstance(a, Mul) else (a,)
        for p in parts:
            if isinstance(p, Const):
                const *= p.value
            else:
                factors.append(p)
    if const == 0:
        return ZERO
    if not factors:
        return Const(const)
    if const != 1:
        factors.insert(0, Const(const))
    if len(factors) == 1:
        return factors[0]
    return Mul(factors)


def neg(a) -> Expr:
    return mul(-1, a)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(b, Const):
        if b.value == 0:
            raise DivisionByZero("constant division by zero")
        return mul(Const(1 / b.value), a)
    if a == ZERO:
        return ZERO
    return Div(a, b)


def power(a, n: int) -> Expr:
    a = as_expr(a)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const):
        if a.value == 0 and n < 0:
            raise DivisionByZero("constant division by zero")
        return Const(a.value ** n)
    if n < 0:
        return Div(ONE, power(a, -n))
    return Pow(a, n)


# differentiation and substitution ------------------------------------


def _diff(e: Expr, name: str, memo) -> Expr:
    if e in memo:
        return memo[e]
    if name not in e.free_symbols():
        out = ZERO
    elif isinstance(e, Sym):
        out = ONE
    elif isinstance(e, Add):
        out = add(*(_diff(t, name, memo) for t in e.terms))
    elif isinstance(e, Mul):
        pieces = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _diff(f, name, memo)
            if df == ZERO:
                continue
            pieces.append(mul(*fs[:i], df, *fs[i + 1 :]))
        out = add(*pieces)
    elif isinstance(e, Div):
        dn = _diff(e.num, name, memo)
        dd = _diff(e.den, name, memo)
        out = sub(div(dn, e.den), div(mul(e.num, dd), power(e.den, 2)))
    elif isinstance(e, Pow):
        out = mul(e.exp, power(e.base, e.exp - 1), _diff(e.base, name, memo))
    else:
        raise TypeError(type(e))
    memo[e] = out
    return out


def sub(a, b) -> Expr:
    return add(a, neg(b))


def _subs(e: Expr, mapping, memo) -> Expr:
    if e in memo:
        return memo[e]
    if isinstance(e, Const):
        out = e
    elif isinstance(e, Sym):
        out = mapping.get(e.name, e)
    elif isinstance(e, Add):
        out = add(*(_subs(t, mapping, memo) for t in e.terms))
    elif isinstance(e, Mul):
        out = mul(*(_subs(f, mapping, memo) for f in e.factors))
    elif isinstance(e, Div):
        out = div(_subs(e.num, mapping, memo), _subs(e.den, mapping, memo))
    elif isinstance(e, Pow):
        out = power(_subs(e.base, mapping, memo), e.exp)
    else:
        raise TypeError(type(e))
    memo[e] = out
    return out


# compilation ----------------------------------------------------------


def _compile(root: Expr, mode: str):
    lines = []
    consts = {}
    names = {}
    argnames = sorted(root.free_symbols())

    def emit(node):
        if node in names:
            return names[node]
        if isinstance(node, Sym):
            return node.name
        if isinstance(node, Const):
            v = node.value
            if mode == "float":
                tok = repr(float(v))
            elif v.denominator == 1:
                tok = f"({v.numerator})"
            else:
                tok = f"_k{len(consts)}"
                consts[tok] = v
            names[node] = tok
            return tok
        if isinstance(node, Add):
            parts = [emit(t) for t in node.terms]
            rhs = " + ".join(parts)
        elif isinstance(node, Mul):
            parts = [emit(f) for f in node.factors]
            rhs = " * ".join(parts)
        elif isinstance(node, Div):
            rhs = f"{emit(node.num)} / {emit(node.den)}"
        elif isinstance(node, Pow):
            rhs = f"{emit(node.base)} ** {node.exp}"
        else:
            raise TypeError(type(node))
        tok = f"_t{len(lines)}"
        lines.append(f"    {tok} = {rhs}")
        names[node] = tok
        return tok

    result = emit(root)
    src = f"def _fn({', '.join(argnames)}):\n" + "\n".join(lines) + f"\n    return {result}\n"
    namespace = dict(consts)
    exec(compile(src, "<abslab-expr>", "exec"), namespace)
    fn = namespace["_fn"]
    fn.argnames = tuple(argnames)
    fn.source = src
    return fn


# printing -------------------------------------------------------------


def to_string(e: Expr) -> str:
    if isinstance(e, Const):
        v = e.value
        return str(v) if v >= 0 else f"({v})"
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Add):
        return "(" + " + ".join(to_string(t) for t in e.terms) + ")"
    if isinstance(e, Mul):
        return "*".join(to_string(f) for f in e.factors)
    if isinstance(e, Div):
        return f"({to_string(e.num)})/({to_string(e.den)})"
    if isinstance(e, Pow):
        return f"({to_string(e.base)})^{e.exp}"
    raise TypeError(type(e))


# evaluation entry points ---------------------------------------------


def eval_expr(expr: Expr, assignment: Mapping):
    """Exact value of ``expr`` at ``assignment``."""
    return expr.evaluate(assignment)


def jet_eval(expr: Expr, assignment: Mapping, wrt):
    """Evaluate with exact first partials with respect to the symbols ``wrt``."""
    from .jet import Jet

    env = dict(assignment)
    for name in wrt:
        if name not in env:
            raise MissingSymbol([name])
        env[name] = Jet.variable(env[name], name)
    out = expr.evaluate(env)
    if not isinstance(out, Jet):
        out = Jet(out)
    return out

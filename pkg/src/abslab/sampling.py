"""Random exact sampling, identity testing and the check report type."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

from .errors import DegenerateSample, SamplingExhausted
from .expr import Expr
from .field import to_json_value

DEFAULT_BOUND = 1000
DEFAULT_RETRIES = 32
DEFAULT_SAMPLES = 8
DEFAULT_SEED = 20081108

PASS = "PASS"
FAIL = "FAIL"
NOT_APPLICABLE = "NOT-APPLICABLE"


def make_rng(seed=None) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(DEFAULT_SEED if seed is None else seed)


def rand_rational(rng: random.Random, bound: int = DEFAULT_BOUND) -> Fraction:
    """Numerator uniform in [-B, B], denominator uniform in [1, B]."""
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def rand_nonzero(rng: random.Random, bound: int = DEFAULT_BOUND) -> Fraction:
    while True:
        x = rand_rational(rng, bound)
        if x != 0:
            return x


def rand_distinct(rng: random.Random, k: int, bound: int = DEFAULT_BOUND, nonzero=True):
    out = []
    while len(out) < k:
        x = rand_nonzero(rng, bound) if nonzero else rand_rational(rng, bound)
        if x not in out:
            out.append(x)
    return out


def is_nonzero_discrepancy(d) -> bool:
    if d is None:
        return False
    if isinstance(d, Mapping):
        return any(is_nonzero_discrepancy(v) for v in d.values())
    if isinstance(d, (list, tuple)):
        return any(is_nonzero_discrepancy(v) for v in d)
    if isinstance(d, bool):
        return d
    return getattr(d, "value", d) != 0


def _json(x):
    if isinstance(x, Mapping):
        return {str(k): _json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json(v) for v in x]
    if isinstance(x, (str, bool, int)) or x is None:
        return x
    if hasattr(x, "to_json") and not hasattr(x, "tower"):
        return x.to_json()
    return to_json_value(x)


@dataclass
class CheckReport:
    """Outcome of one randomized check.

    ``witness`` is the failing sample; ``replay`` recomputes its
    discrepancy so a FAIL can be confirmed independently of the run.
    """

    name: str
    verdict: str
    samples: int = 0
    witness: dict | None = None
    discrepancy: Any = None
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0
    replay: Callable[[], Any] | None = field(default=None, repr=False, compare=False)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL

    def to_dict(self, stable: bool = False) -> dict:
        out = {
            "check": self.name,
            "verdict": self.verdict,
            "samples": self.samples,
        }
        if self.witness is not None:
            out["witness"] = _json(self.witness)
            out["discrepancy"] = _json(self.discrepancy)
        if self.details:
            out["details"] = _json(self.details)
        if not stable:
            out["elapsed_s"] = round(self.elapsed, 6)
        return out


def not_applicable(name: str, reason: str) -> CheckReport:
    return CheckReport(name, NOT_APPLICABLE, details={"reason": reason})


def run_samples(
    name: str,
    draw: Callable[[random.Random], dict],
    test: Callable[[dict], Any],
    samples: int = DEFAULT_SAMPLES,
    rng: random.Random | None = None,
    retries: int = DEFAULT_RETRIES,
    details: dict | None = None,
) -> CheckReport:
    """Evaluate ``test`` on ``samples`` random draws.

    ``draw`` builds a sample; ``test`` returns a discrepancy (zero, None or
    a container of zeros on success).  A :class:`DegenerateSample` raised by
    either triggers a redraw, at most ``retries`` times per sample.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = make_rng(rng)
    start = time.perf_counter()
    done = 0
    while done < samples:
        for _ in range(retries):
            try:
                sample = draw(rng)
                d = test(sample)
                break
            except DegenerateSample:
                continue
        else:
            raise SamplingExhausted(f"{name}: {retries} consecutive degenerate draws")
        done += 1
        if is_nonzero_discrepancy(d):
            return CheckReport(
                name,
                FAIL,
                done,
                witness=sample,
                discrepancy=d,
                details=dict(details or {}),
                elapsed=time.perf_counter() - start,
                replay=lambda s=sample: test(s),
            )
    return CheckReport(name, PASS, done, details=dict(details or {}), elapsed=time.perf_counter() - start)


def identity_test(
    lhs: Expr,
    rhs: Expr,
    free: Iterable[str] | None = None,
    samples: int = DEFAULT_SAMPLES,
    rng=None,
    bound: int = DEFAULT_BOUND,
    retries: int = DEFAULT_RETRIES,
    fixed: Mapping | None = None,
) -> CheckReport:
    """Randomized exact test of ``lhs == rhs`` over the symbols in ``free``.

    Symbols not in ``free`` must be supplied through ``fixed``.
    """
    names = sorted(free) if free is not None else sorted(lhs.free_symbols() | rhs.free_symbols())
    fixed = dict(fixed or {})

    def draw(r):
        env = dict(fixed)
        env.update({n: rand_rational(r, bound) for n in names})
        return env

    def test(env):
        return lhs.evaluate(env) - rhs.evaluate(env)

    return run_samples("identity", draw, test, samples, rng, retries)

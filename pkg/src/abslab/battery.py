"""Check batteries and the JSON report."""

from __future__ import annotations

import datetime as _dt
import json
import random
import time
from dataclasses import dataclass, field
from importlib import resources

from . import __version__
from .catalog import CATALOG, LAX_NAMES, QuadEquation
from .checks import check_affine_linear, check_cube_consistency, check_lax_compatibility, check_square_symmetry
from .errors import AbslabError, DepthExceeded, NotApplicable, SamplingExhausted, UnknownEquation
from .expr import to_string
from .field import to_json_value
from .miura import (
    MIURA_NAMES,
    check_greece2,
    check_miura_roundtrip,
    check_schroedinger_reduction,
    volterra_pushforward_check,
)
from .sampling import DEFAULT_SEED, FAIL, NOT_APPLICABLE, PASS, CheckReport, not_applicable
from .symmetry import (
    check_f1_routes,
    check_five_point_compatibility,
    check_flow_commutativity,
    check_iden,
    check_three_point_compatibility,
    check_ydkn_table,
    default_flow,
    table_flow,
    tau_derivative,
)

SKIPPED = "SKIPPED"
ERROR = "ERROR"

VERIFY_SECTIONS = (
    "affine",
    "square-symmetry",
    "cube",
    "lax",
    "h-extract",
    "3pt",
    "5pt",
    "commutator",
    "miura",
    "greece2",
)
SYMMETRY_SECTIONS = ("h-extract", "3pt", "3pt-m", "3pt-nonautonomous", "5pt", "iden", "f1-routes", "commutator")
MIURA_SECTIONS = ("greece2", "miura")
ORDER = (
    "affine",
    "square-symmetry",
    "cube",
    "lax",
    "h-extract",
    "3pt",
    "3pt-m",
    "3pt-nonautonomous",
    "5pt",
    "iden",
    "f1-routes",
    "commutator",
    "miura",
    "greece2",
)

# default sample counts per section
SAMPLES = {
    "affine": 20,
    "square-symmetry": 20,
    "cube": 10,
    "lax": 5,
    "h-extract": 5,
    "3pt": 10,
    "3pt-m": 10,
    "3pt-nonautonomous": 10,
    "5pt": 10,
    "iden": 8,
    "f1-routes": 10,
    "commutator": 8,
    "miura": 3,
    "greece2": 8,
    "schroedinger": 3,
}
ELLIPTIC_SAMPLES = {"cube": 5, "3pt": 3, "3pt-m": 3, "3pt-nonautonomous": 2, "5pt": 3, "commutator": 3}
NONAUTONOMOUS_BETAS = (1, 2, 3, 5)


def section_rng(seed: int, section: str) -> random.Random:
    """Independent stream per section, so a selection does not shift the others."""
    return random.Random(f"{seed}:{section}")


def load_schema() -> dict:
    return json.loads(resources.files("abslab").joinpath("report.schema.json").read_text())


@dataclass
class Entry:
    section: str
    report: CheckReport
    fatal: bool = False  # sampling exhausted or an unexpected error

    def to_dict(self, stable=False):
        return {"section": self.section, **self.report.to_dict(stable)}


@dataclass
class Report:
    command: str
    equation: dict
    seed: int
    entries: list = field(default_factory=list)
    symmetry: dict = field(default_factory=dict)
    miura: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    started: float = field(default_factory=time.time)

    def add(self, section, report: CheckReport, fatal=False):
        self.entries.append(Entry(section, report, fatal))

    @property
    def checks(self):
        return [e.report for e in self.entries]

    def verdicts(self) -> dict:
        return {e.section + ("" if e.report.name == e.section else f"/{e.report.name}"): e.report.verdict for e in self.entries}

    @property
    def any_fail(self) -> bool:
        return any(e.report.verdict == FAIL for e in self.entries)

    @property
    def any_fatal(self) -> bool:
        return any(e.fatal for e in self.entries)

    def exit_code(self, sim_ok=True) -> int:
        if self.any_fail or not sim_ok:
            return 1
        if self.any_fatal:
            return 3
        return 0

    def to_json(self, stable=False) -> dict:
        out = {
            "tool": "abslab",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "equation": self.equation,
            "checks": [e.to_dict(stable) for e in self.entries],
            "summary": {
                "pass": sum(e.report.verdict == PASS for e in self.entries),
                "fail": sum(e.report.verdict == FAIL for e in self.entries),
                "not_applicable": sum(e.report.verdict == NOT_APPLICABLE for e in self.entries),
                "skipped": sum(e.report.verdict == SKIPPED for e in self.entries),
                "error": sum(e.report.verdict == ERROR for e in self.entries),
            },
        }
        if self.symmetry:
            out["symmetry"] = self.symmetry
        if self.miura:
            out["miura"] = self.miura
        if self.simulation:
            out["simulation"] = self.simulation
        if not stable:
            out["timestamp"] = _dt.datetime.fromtimestamp(self.started, _dt.timezone.utc).isoformat()
            out["elapsed_s"] = round(time.time() - self.started, 6)
        return out

    def dumps(self, stable=False) -> str:
        return json.dumps(self.to_json(stable), indent=2, sort_keys=False) + "\n"


def describe_equation(eq: QuadEquation, source="catalog", recognized=None) -> dict:
    out = {"name": eq.name, "source": source, "expr": to_string(eq.expr)}
    for key in ("delta", "g2", "g3"):
        v = getattr(eq, key)
        if v is not None:
            out[key] = to_json_value(v)
    if recognized is not None:
        out["recognized_as"] = {"name": recognized[0], "factor": to_json_value(recognized[1])}
    return out


# ---------------------------------------------------------------------------


def _run(report: Report, section: str, fn, *args, **kw):
    try:
        rep = fn(*args, **kw)
    except NotApplicable as exc:
        report.add(section, not_applicable(section, str(exc)))
        return None
    except UnknownEquation as exc:
        report.add(section, not_applicable(section, str(exc)))
        return None
    except DepthExceeded as exc:
        report.add(section, not_applicable(section, f"{exc}; a free curve needs fewer square roots"))
        return None
    except SamplingExhausted as exc:
        report.add(section, CheckReport(section, ERROR, details={"reason": str(exc)}), fatal=True)
        return None
    except Exception as exc:  # the battery records, it does not raise
        report.add(section, CheckReport(section, ERROR, details={"reason": f"{type(exc).__name__}: {exc}"}), fatal=True)
        return None
    reps = rep if isinstance(rep, list) else [rep]
    for r in reps:
        report.add(section, r)
    return rep


def _samples(section, override, eq):
    if override is not None:
        return override
    if eq.elliptic and section in ELLIPTIC_SAMPLES:
        return ELLIPTIC_SAMPLES[section]
    return SAMPLES[section]


def _has_table(eq):
    try:
        table_flow(eq)
        return True
    except UnknownEquation:
        return False


def _draw_alpha(eq, rng):
    return eq.draw_params(rng, 2)


def _miura_parts(report, eq, seed, n):
    if eq.name not in MIURA_NAMES:
        reason = "Q4 cannot be mapped to the Volterra lattice" if eq.name == "Q4" else f"no Miura data for {eq.name}"
        report.add("miura", not_applicable("miura", reason))
        return
    _run(report, "miura", check_miura_roundtrip, eq, samples=n("miura"), rng=section_rng(seed, "miura"))
    _run(report, "miura", check_schroedinger_reduction, eq, samples=n("schroedinger"), rng=section_rng(seed, "schroedinger"))
    rng = section_rng(seed, "volterra")
    flow = table_flow(eq)(*_draw_alpha(eq, rng))
    _run(report, "miura", volterra_pushforward_check, flow, rng=rng)


def run_battery(
    eq: QuadEquation,
    sections=VERIFY_SECTIONS,
    samples=None,
    seed=DEFAULT_SEED,
    command="verify",
    source="catalog",
    recognized=None,
) -> Report:
    """Run the selected checks in the fixed order of ``ORDER``.

    An affine-linearity failure skips everything after it; other failures
    are recorded and the battery continues.
    """
    report = Report(command, describe_equation(eq, source, recognized), seed)

    def n(section):
        return _samples(section, samples, eq)

    unknown = set(sections) - set(ORDER)
    if unknown:
        raise ValueError(f"unknown sections: {', '.join(sorted(unknown))}")
    order = [s for s in ORDER if s in sections]
    broken = None
    for section in order:
        if broken:
            report.add(section, CheckReport(section, SKIPPED, details={"reason": broken}))
            continue
        rng = section_rng(seed, section)
        if section == "affine":
            rep = _run(report, section, check_affine_linear, eq, samples=n(section), rng=rng)
            if rep is None or rep.verdict != PASS:
                broken = "equation is not affine-linear"
        elif section == "square-symmetry":
            _run(report, section, check_square_symmetry, eq, samples=n(section), rng=rng)
        elif section == "cube":
            _run(report, section, check_cube_consistency, eq, samples=n(section), rng=rng)
        elif section == "lax":
            if eq.name in LAX_NAMES:
                _run(report, section, check_lax_compatibility, eq, samples=n(section), rng=rng)
            else:
                report.add(section, not_applicable(section, f"no Lax data for {eq.name}"))
        elif section == "h-extract":
            _run(report, section, check_ydkn_table, eq, samples=n(section), rng=rng)
        elif section == "3pt":
            _run(report, section, check_three_point_compatibility, eq, samples=n(section), rng=rng)
        elif section == "3pt-m":
            _run(report, section, check_three_point_compatibility, eq, direction="m", samples=n(section), rng=rng)
        elif section == "3pt-nonautonomous":
            _run(
                report,
                section,
                check_three_point_compatibility,
                eq,
                betas=NONAUTONOMOUS_BETAS,
                samples=n(section),
                rng=rng,
            )
        elif section == "5pt":
            _run(report, section, check_five_point_compatibility, eq, samples=n(section), rng=rng)
        elif section in ("commutator", "iden", "f1-routes"):
            flow = default_flow(eq)(*_draw_alpha(eq, rng))
            fn = {"commutator": check_flow_commutativity, "iden": check_iden, "f1-routes": check_f1_routes}[section]
            _run(report, section, fn, flow, samples=n(section), rng=rng)
        elif section == "miura":
            _miura_parts(report, eq, seed, n)
        elif section == "greece2":
            if eq.name in MIURA_NAMES:
                _run(report, section, check_greece2, eq, samples=n(section), rng=rng)
            else:
                report.add(section, not_applicable(section, f"no Miura data for {eq.name}"))
        else:
            raise ValueError(f"unknown section {section}")
    return report


def symmetry_data(eq: QuadEquation, alpha, beta=None) -> dict:
    """Coefficients of the flow at ``alpha`` and their tau-derivatives."""
    source = "table" if _has_table(eq) else "h-polynomial"
    if source == "table":
        flow = table_flow(eq)(alpha)
    else:
        flow = default_flow(eq)(alpha, beta)
    out = {"source": source, "alpha": _param_json(alpha), "coefficients": flow.coeffs.to_json()}
    if beta is not None and source != "table":
        out["beta"] = _param_json(beta)
    out["tau_rates"] = tau_derivative(flow.coeffs).to_json()["rates"]
    return out


def _param_json(p):
    return p.to_json() if hasattr(p, "g2") else to_json_value(p)


def run_symmetries(eq, samples=None, seed=DEFAULT_SEED, alpha=None, source="catalog", recognized=None) -> Report:
    report = run_battery(eq, SYMMETRY_SECTIONS, samples, seed, "symmetries", source, recognized)
    if report.entries and report.entries[0].report.verdict != SKIPPED:
        rng = section_rng(seed, "symmetry-data")
        a, b = eq.draw_params(rng, 2)
        if alpha is not None and not eq.elliptic:
            a = alpha
        try:
            report.symmetry = symmetry_data(eq, a, b)
        except AbslabError as exc:
            report.symmetry = {"error": str(exc)}
    return report


def run_miura(eq, samples=None, seed=DEFAULT_SEED, source="catalog", recognized=None) -> Report:
    report = Report("miura", describe_equation(eq, source, recognized), seed)

    def n(section):
        return _samples(section, samples, eq)

    if eq.name not in MIURA_NAMES:
        reason = "Q4 cannot be mapped to the Volterra lattice" if eq.name == "Q4" else f"no Miura data for {eq.name}"
        for s in ("greece2", "miura"):
            report.add(s, not_applicable(s, reason))
        return report
    _run(report, "greece2", check_greece2, eq, samples=n("greece2"), rng=section_rng(seed, "greece2"))
    _miura_parts(report, eq, seed, n)
    report.miura = worked_potential(eq)
    return report


def worked_potential(eq, sites=8, alpha=0):
    """v for u_n = n (a closed-form reference for H1 and H2)."""
    from .miura import potential_v

    try:
        v = potential_v(eq, list(range(sites)), alpha)
    except AbslabError as exc:
        return {"u": "n", "alpha": to_json_value(alpha), "error": str(exc)}
    return {"u": "n", "alpha": to_json_value(alpha), **v.to_json()}


def known_equations():
    return list(CATALOG)

"""Exception hierarchy shared by every abslab module."""


class AbslabError(Exception):
    """Base class for all errors raised by abslab."""


class DegenerateSample(AbslabError):
    """A sample point hit a singularity; callers resample."""


class DivisionByZero(DegenerateSample, ZeroDivisionError):
    pass


class DegenerateCorner(DegenerateSample):
    """The coefficient of the unknown vertex vanishes."""

    def __init__(self, message="degenerate corner", site=None):
        super().__init__(message if site is None else f"{message} at site {site}")
        self.site = site


class DegenerateStencil(DegenerateSample):
    pass


class ZeroMatrixEntry(DegenerateSample):
    pass


class ZeroMu(DegenerateSample):
    pass


class SamplingExhausted(AbslabError):
    """Every retry for one sample hit a singularity."""


class MissingSymbol(AbslabError, KeyError):
    def __str__(self):
        return f"unassigned symbol(s): {', '.join(self.args[0])}"


class DepthExceeded(AbslabError):
    pass


class NotSquareFree(AbslabError):
    """An adjoined value turned out to be a square in the tower below."""


class UnknownEquation(AbslabError, KeyError):
    pass


class MissingParameter(AbslabError):
    pass


class NotBiquadratic(AbslabError):
    pass


class NotAffineLinear(AbslabError):
    def __init__(self, variable):
        super().__init__(f"equation is not affine-linear in {variable}")
        self.variable = variable


class ZeroValueInA2Map(AbslabError):
    pass


class InsufficientSeeds(AbslabError):
    pass


class ZeroPotential(AbslabError):
    pass


class NotApplicable(AbslabError):
    """Precondition of an operation is violated by construction (not by sampling)."""


class ParseError(AbslabError, SyntaxError):
    """Malformed equation text; ``line`` and ``column`` are 1-based."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = self.lineno = line
        self.column = self.offset = column

    def __str__(self):
        return self.args[0]


class SimulationError(AbslabError):
    pass


class StencilCollapse(SimulationError):
    def __init__(self, eps, site):
        super().__init__(f"stencil collapsed at eps={eps!r}, n={site}")
        self.eps = eps
        self.site = site


class NonFiniteState(SimulationError):
    def __init__(self, eps):
        super().__init__(f"non-finite state at eps={eps!r}")
        self.eps = eps


class XiDegenerate(SimulationError):
    def __init__(self, eps, site):
        super().__init__(f"Backlund reconstruction degenerate at eps={eps!r}, n={site}")
        self.eps = eps
        self.site = site


class InsufficientData(SimulationError):
    pass


class ConfigError(AbslabError, ValueError):
    pass

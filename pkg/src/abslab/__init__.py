"""Exact verification workbench for affine-linear quad-graph lattice equations.

The catalog holds the nine ABS equations with their Lax data and
three-point symmetry coefficients.  Checks sample exact rational (or
square-root tower) points and report PASS, FAIL with a witness, or
NOT-APPLICABLE.  A separate floating-point module integrates the
symmetry flows and chains Baecklund transformations.
"""

__version__ = "0.1.0"

from .catalog import CATALOG, build_equation, lax_data, ydkn_table  # noqa: E402
from .errors import AbslabError  # noqa: E402

__all__ = ["CATALOG", "AbslabError", "build_equation", "lax_data", "ydkn_table", "__version__"]

"""uclab: a numerical laboratory for quantitative unique continuation.

Implements three-sphere inequalities with explicit constants, Carleman
estimates with logarithmic and power weights, and the recursive
vanishing-order/doubling machinery for second-order elliptic operators with
critically singular lower-order coefficients, together with quadrature and a
finite-difference solver used to verify all of it empirically.
"""

__version__ = "0.1.0"

from . import errors  # noqa: F401

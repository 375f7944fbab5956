"""Neumann eigenvalues of the regional fractional p-Laplacian.

Thin wrapper over the C++ core; see ``help(fracneu._fracneu)``.
"""

from ._fracneu import *  # noqa: F401,F403
from ._fracneu import __doc__  # noqa: F401

__version__ = "0.1.0"

"""Performance-model toolkit for dense linear-algebra kernels."""

from ._perfmod import *  # noqa: F401,F403
from ._perfmod import __doc__  # noqa: F401

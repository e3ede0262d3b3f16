"""Probabilistic exact deletion machine simulator."""

from ._qdel import *  # noqa: F401,F403
from ._qdel import __doc__  # noqa: F401

"""Active-learning experimental design for direct and spillover effect
estimation on networks with interference."""

from aci._core import *  # noqa: F401,F403
from aci._core import __doc__  # noqa: F401

__version__ = "0.1.0"

"""Frequency-pattern design and performance analysis for multi-frequency
interferometric ranging."""

from ._core import *  # noqa: F401,F403
from ._core import MfiError, FrequencyPlan  # noqa: F401

"""Shared rounding helper.

Every stage of the pipeline rounds half away from zero so that independent
implementations agree bit-exactly (numpy's default rounding is half-to-even).
"""

import numpy as np


def round_half_away(x):
    """Round to nearest integer, ties away from zero. Works on arrays and scalars."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)

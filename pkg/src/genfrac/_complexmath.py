"""Type-dispatching complex helpers.

Laplace-domain code runs in two arithmetic modes: ordinary ``complex``
for speed and ``mpmath`` types when a contour sum needs more digits than
IEEE doubles can carry.  Symbols and transforms are written once against
these helpers so the same closure works in both modes.
"""
import cmath

import mpmath as mp

MP_TYPES = (mp.mpf, mp.mpc)


def is_mp(x):
    return isinstance(x, MP_TYPES)


def cexp(x):
    return mp.exp(x) if is_mp(x) else cmath.exp(x)


def clog(x):
    """Principal branch logarithm for complex or mpmath input."""
    return mp.log(x) if is_mp(x) else cmath.log(x)


def csqrt(x):
    return mp.sqrt(x) if is_mp(x) else cmath.sqrt(x)


def csin(x):
    return mp.sin(x) if is_mp(x) else cmath.sin(x)


def ccos(x):
    return mp.cos(x) if is_mp(x) else cmath.cos(x)


def cabs(x):
    return abs(x)


def cfinite(x):
    if is_mp(x):
        return mp.isfinite(x)
    return cmath.isfinite(x)


def on_closed_negative_axis(s) -> bool:
    """True when s = 0 or s lies on the branch cut (-inf, 0]."""
    return s.imag == 0 and s.real <= 0

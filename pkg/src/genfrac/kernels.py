"""Memory kernels of the convolutional time derivative, via their Laplace symbols.

A kernel k(t) enters every solution formula only through the symbol

    g(s) = s * k_hat(s),

where k_hat is the Laplace transform of k.  Admissible symbols are
complete Bernstein functions with g(s) -> infinity, g(s)/s -> 0 as
s -> infinity and g(s) -> 0, g(s)/s -> infinity as s -> 0+.  Built-in
variants:

* single power:       g(s) = s**alpha,           k(t) = t**(-alpha)/Gamma(1-alpha)
* weighted powers:    g(s) = sum c_j s**alpha_j
* uniformly distributed orders over (0,1):  g(s) = (s-1)/log(s)
* custom:             any user handle s -> g(s)

Custom kernels are accepted as g-symbols directly, never as time-domain
samples: all downstream formulas need only g(s), and recovering a symbol
from sampled k(t) would itself be an ill-posed inversion.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath as mp

from ._complexmath import clog, is_mp, on_closed_negative_axis
from .errors import ConfigError, DomainError

SINGLE = "single"
MULTI = "multi"
DISTRIBUTED_UNIFORM = "distributed-uniform"
CUSTOM = "custom"

_VARIANTS = (SINGLE, MULTI, DISTRIBUTED_UNIFORM, CUSTOM)

# Gregory coefficients of w/log(1+w): value at s = 1+w of (s-1)/log(s).
# Exact rationals so the expansion stays valid in extended precision.
_GREGORY = (
    (1, 1), (1, 2), (-1, 12), (1, 24), (-19, 720),
    (3, 160), (-863, 60480), (275, 24192), (-33953, 3628800), (8183, 1036800),
)
# Width of the expansion window around s = 1 in double precision; the
# direct formula loses digits there through log(s) ~ s - 1 cancellation.
_TAYLOR_WINDOW = 1e-3


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a memory kernel through its symbol g(s).

    Use the classmethod constructors; the raw constructor validates but
    does not canonicalize custom handles.
    """

    variant: str
    alpha: float | None = None
    terms: tuple[tuple[float, float], ...] | None = None
    custom_g: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise DomainError(f"unknown kernel variant {self.variant!r}")
        if self.variant == SINGLE:
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise DomainError("single-term order must lie strictly in (0, 1)")
        elif self.variant == MULTI:
            if not self.terms:
                raise DomainError("multi-term kernel needs at least one (weight, order) pair")
            merged: dict[float, float] = {}
            for c, a in self.terms:
                if c <= 0.0:
                    raise DomainError("multi-term weights must be positive")
                if not 0.0 < a < 1.0:
                    raise DomainError("multi-term orders must lie strictly in (0, 1)")
                merged[a] = merged.get(a, 0.0) + c
            canonical = tuple(
                (merged[a], a) for a in sorted(merged, reverse=True)
            )
            object.__setattr__(self, "terms", canonical)
        elif self.variant == CUSTOM:
            if self.custom_g is None:
                raise DomainError("custom kernel needs a g(s) handle")

    # -- constructors -------------------------------------------------

    @classmethod
    def single_term(cls, alpha: float) -> "KernelSpec":
        """Power kernel of order alpha: g(s) = s**alpha."""
        return cls(SINGLE, alpha=alpha)

    @classmethod
    def multi_term(cls, terms: Sequence[tuple[float, float]]) -> "KernelSpec":
        """Weighted sum of power kernels: g(s) = sum c_j * s**alpha_j.

        Pairs are (weight, order).  Equal orders are merged by summing
        weights and the result is stored with orders strictly decreasing.
        """
        return cls(MULTI, terms=tuple((float(c), float(a)) for c, a in terms))

    @classmethod
    def distributed_uniform(cls) -> "KernelSpec":
        """Orders uniformly distributed over (0, 1): g(s) = (s-1)/log(s)."""
        return cls(DISTRIBUTED_UNIFORM)

    @classmethod
    def custom(cls, g: Callable) -> "KernelSpec":
        """Wrap a user symbol handle evaluating g(s) for |arg s| < pi."""
        return cls(CUSTOM, custom_g=g)

    # -- evaluation ---------------------------------------------------

    def g(self, s):
        """Evaluate the symbol g(s).

        Accepts positive reals (returned as float), ``complex`` off the
        closed negative axis, and mpmath numbers for extended-precision
        contour work.  Principal branches throughout.
        """
        if isinstance(s, (int, float)) and not is_mp(s):
            if s <= 0.0:
                raise DomainError("g(s) requires s > 0 on the real axis")
            return self._g_real(float(s))
        if on_closed_negative_axis(s):
            raise DomainError("g(s) is not defined on the closed negative real axis")
        return self._g_complex(s)

    def k_hat(self, s):
        """Laplace transform of the kernel: k_hat(s) = g(s)/s."""
        return self.g(s) / s

    def _g_real(self, s: float) -> float:
        if self.variant == SINGLE:
            return s ** self.alpha
        if self.variant == MULTI:
            return math.fsum(c * s ** a for c, a in self.terms)
        if self.variant == DISTRIBUTED_UNIFORM:
            w = s - 1.0
            if abs(w) < _TAYLOR_WINDOW:
                return _gregory_sum(w)
            return w / math.log(s)
        out = self.custom_g(s)
        return out.real if isinstance(out, complex) else float(out)

    def _g_complex(self, s):
        if self.variant == SINGLE:
            return s ** self.alpha
        if self.variant == MULTI:
            return sum(c * s ** a for c, a in self.terms)
        if self.variant == DISTRIBUTED_UNIFORM:
            w = s - 1.0
            if is_mp(s):
                # mpmath log is accurate near 1; series needed only when
                # w underflows the working precision entirely.
                if abs(w) < mp.mpf(10) ** (-mp.mp.dps):
                    return _gregory_sum_mp(w)
                return w / mp.log(s)
            if abs(w) < _TAYLOR_WINDOW:
                return _gregory_sum(w)
            return w / cmath.log(s)
        return self.custom_g(s)

    def cache_token(self):
        """Hashable identity for memoization of inversions."""
        if self.variant == CUSTOM:
            return (CUSTOM, id(self.custom_g))
        return (self.variant, self.alpha, self.terms)


def _gregory_sum(w):
    acc = 0.0
    wp = 1.0
    for num, den in _GREGORY:
        acc += (num / den) * wp
        wp = wp * w
    return acc


def _gregory_sum_mp(w):
    acc = mp.mpf(0)
    wp = mp.mpf(1)
    for num, den in _GREGORY:
        acc += mp.mpf(num) / den * wp
        wp = wp * w
    return acc


def eval_g(kernel: KernelSpec, s):
    """Symbol evaluation as a free function; see ``KernelSpec.g``."""
    return kernel.g(s)


def eval_k_hat(kernel: KernelSpec, s):
    """Kernel Laplace transform k_hat(s) = g(s)/s."""
    return kernel.k_hat(s)


@dataclass(frozen=True)
class ValidityReport:
    """Outcome of the numerical admissibility checks for a symbol.

    The four limit attributes are necessary-condition trend checks; the
    sector attribute samples |arg g(s)| <= |arg s| on oblique rays.
    """

    g_over_s_vanishes_at_infinity: bool
    g_diverges_at_infinity: bool
    g_over_s_diverges_at_zero: bool
    g_vanishes_at_zero: bool
    sector_bound_holds: bool
    failures: tuple[str, ...] = ()

    @property
    def admissible(self) -> bool:
        return (
            self.g_over_s_vanishes_at_infinity
            and self.g_diverges_at_infinity
            and self.g_over_s_diverges_at_zero
            and self.g_vanishes_at_zero
            and self.sector_bound_holds
        )


_SECTOR_ANGLES = (math.pi / 4, math.pi / 2, 3 * math.pi / 4)
_SECTOR_RADII = (1e-4, 1e-2, 1.0, 1e2, 1e4)
_SECTOR_SLACK = 1e-12


def _trend(values, direction: str) -> bool:
    """Strict monotone trend with at least a factor-2 overall change.

    True limits are unverifiable from finitely many samples, so the test
    asks for (i) strict monotonicity in the required direction over the
    outer samples and (ii) a factor >= 2 between the median sample and
    the extreme one.  The factor is taken over half the probe span, not
    per decade: distributed-order symbols move only logarithmically fast
    and a per-decade requirement would misreport them.
    """
    outer = values[-4:]
    if direction == "down":
        monotone = all(b < a for a, b in zip(outer, outer[1:]))
        factor = values[len(values) // 2] >= 2.0 * values[-1]
    else:
        monotone = all(b > a for a, b in zip(outer, outer[1:]))
        factor = values[-1] >= 2.0 * values[len(values) // 2]
    return monotone and factor


def validate_admissibility(kernel: KernelSpec, probe: Sequence[float] | None = None) -> ValidityReport:
    """Check the limit behaviour and sector bound of a symbol numerically.

    ``probe`` must be a positive, strictly increasing grid spanning at
    least four decades; default is 33 points across [1e-8, 1e8].
    Failures are reported, never raised.
    """
    if probe is None:
        probe = [10.0 ** e for e in _linspace(-8.0, 8.0, 33)]
    probe = [float(p) for p in probe]
    if len(probe) < 8 or any(p <= 0 for p in probe):
        raise DomainError("probe must contain at least 8 positive points")
    if any(b <= a for a, b in zip(probe, probe[1:])):
        raise DomainError("probe must be strictly increasing")
    if probe[-1] / probe[0] < 1e4:
        raise DomainError("probe must span at least four decades")

    gv = [kernel.g(p) for p in probe]
    ratio = [g / p for g, p in zip(gv, probe)]

    failures = []
    up_inf = _trend(gv, "up")
    if not up_inf:
        failures.append("g(s) -> infinity as s -> infinity")
    ratio_down = _trend(ratio, "down")
    if not ratio_down:
        failures.append("g(s)/s -> 0 as s -> infinity")
    down_zero = _trend(list(reversed(gv)), "down")
    if not down_zero:
        failures.append("g(s) -> 0 as s -> 0")
    ratio_up_zero = _trend(list(reversed(ratio)), "up")
    if not ratio_up_zero:
        failures.append("g(s)/s -> infinity as s -> 0")

    sector_ok = True
    for ang in _SECTOR_ANGLES:
        for sign in (1.0, -1.0):
            for rad in _SECTOR_RADII:
                s = rad * cmath.exp(1j * sign * ang)
                try:
                    val = kernel.g(s)
                except Exception:
                    sector_ok = False
                    break
                if abs(cmath.phase(complex(val))) > ang + _SECTOR_SLACK:
                    sector_ok = False
    if not sector_ok:
        failures.append("|arg g(s)| <= |arg s| on sampled rays")

    return ValidityReport(
        g_over_s_vanishes_at_infinity=ratio_down,
        g_diverges_at_infinity=up_inf,
        g_over_s_diverges_at_zero=ratio_up_zero,
        g_vanishes_at_zero=down_zero,
        sector_bound_holds=sector_ok,
        failures=tuple(failures),
    )


def _linspace(a, b, n):
    step = (b - a) / (n - 1)
    return [a + i * step for i in range(n)]


def kernel_from_json(doc: dict) -> KernelSpec:
    """Build a kernel from its JSON wire form.

    Accepted shapes (field names are part of the CLI contract):

    * ``{"type": "single", "alpha": x}``
    * ``{"type": "multi", "terms": [[c, alpha], ...]}``
    * ``{"type": "distributed-uniform"}``
    * ``{"type": "custom", "g_expr": "<expression in s>"}``
    """
    if not isinstance(doc, dict) or "type" not in doc:
        raise ConfigError("kernel document must be an object with a 'type' field")
    kind = doc["type"]
    known_fields = {
        SINGLE: {"type", "alpha"},
        MULTI: {"type", "terms"},
        DISTRIBUTED_UNIFORM: {"type"},
        CUSTOM: {"type", "g_expr"},
    }
    if kind not in known_fields:
        raise ConfigError(f"unknown kernel type {kind!r}")
    extra = set(doc) - known_fields[kind]
    if extra:
        raise ConfigError(f"unexpected kernel fields: {sorted(extra)}")
    try:
        if kind == SINGLE:
            return KernelSpec.single_term(float(doc["alpha"]))
        if kind == MULTI:
            return KernelSpec.multi_term([(float(c), float(a)) for c, a in doc["terms"]])
        if kind == DISTRIBUTED_UNIFORM:
            return KernelSpec.distributed_uniform()
        from .expressions import compile_expression

        fn = compile_expression(doc["g_expr"], variables=("s",))
        return KernelSpec.custom(lambda s, _fn=fn: _fn(s))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid kernel document: {exc}") from exc

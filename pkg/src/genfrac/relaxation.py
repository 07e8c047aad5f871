"""Fundamental and impulse-response solutions of the general relaxation equation.

The scalar problem with relaxation rate lam > 0 and memory symbol g has
Laplace-domain solutions

    u_hat(s) = g(s) / (s * (g(s) + lam)),      u(0) = 1,
    v_hat(s) = 1 / (g(s) + lam),

and the forced solution  a*u(t) + (v * f)(t).  Everything here reduces
to contour inversion of these transforms plus structure-exploiting
quadrature:

* time integrals of v always go through the identity
  int_0^T v dt = (1 - u(T))/lam, never through direct quadrature of the
  endpoint-singular v;
* convolutions v * f use product integration on a mesh graded toward
  the singular endpoint, with each cell weight computed exactly from u
  through the same identity;
* the subordination densities phi (Laplace weight exp(-tau*g(s))*g/s in
  s) and psi (exp(-tau*g(s))) are inverted on the deformed contour while
  the integrand decays there and on a truncated vertical line otherwise.

``check_theorem_properties`` machine-checks complete monotonicity
(through alternating divided differences with an explicit noise floor),
the open bounds 0 < u < 1 and v > 0, the derivative identity
u' = -lam*v, monotonicity in lam, and the two-sided integral bound
1 - u(T; lam1) <= lam*int_0^T v dt < 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

from scipy.integrate import IntegrationWarning, quad

from ._complexmath import cexp
from .errors import AccuracyError, ConsistencyError, DomainError, QuadratureError
from .kernels import KernelSpec
from .laplace import ContourConfig, bromwich_quad, invert

_CACHE: dict = {}
_CACHE_LIMIT = 500_000

_DERIV_STEP = 0.02          # relative half-step of the derivative stencil
_DERIV_TOL = 1e-4
_LAMBDA_SLACK = 1e-8
_CM_MAX_ORDER = 4
_V_MIN_TIME = 1e-6


def _cfg_key(cfg: ContourConfig):
    return (cfg.method, cfg.nodes, cfg.working_tolerance)


def _cached_invert(kernel: KernelSpec, lam: float, which: str, t: float,
                   cfg: ContourConfig) -> tuple[float, float]:
    key = (kernel.cache_token(), lam, which, t, _cfg_key(cfg))
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    if which == "u":
        def transform(s):
            g = kernel.g(s)
            return g / (s * (g + lam))
    else:
        def transform(s):
            return 1.0 / (kernel.g(s) + lam)
    out = invert(transform, t, cfg)
    if len(_CACHE) > _CACHE_LIMIT:
        _CACHE.clear()
    _CACHE[key] = out
    return out


def fundamental_u(kernel: KernelSpec, lam: float, t: float,
                  cfg: ContourConfig | None = None) -> float:
    """Relaxation decay u(t; lam) with u(0) = 1 returned exactly."""
    cfg = cfg or ContourConfig()
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    if t < 0.0:
        raise DomainError("t must be nonnegative")
    if t == 0.0:
        return 1.0
    value, err = _cached_invert(kernel, lam, "u", t, cfg)
    slack = max(10.0 * err, cfg.working_tolerance)
    if value < -slack or value > 1.0 + slack:
        raise ConsistencyError(
            f"u({t}; {lam}) = {value} falls outside [0, 1] beyond tolerance"
        )
    return value


def impulse_v(kernel: KernelSpec, lam: float, t: float,
              cfg: ContourConfig | None = None) -> float:
    """Forcing kernel v(t; lam); defined here for t >= 1e-6 only.

    v is integrable but generally unbounded as t -> 0; time integrals
    over [0, T] must use ``integral_v`` or ``convolve_v``.
    """
    cfg = cfg or ContourConfig()
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    if t < _V_MIN_TIME:
        raise DomainError(f"impulse response is evaluated only for t >= {_V_MIN_TIME}")
    value, err = _cached_invert(kernel, lam, "v", t, cfg)
    if value < -max(10.0 * err, cfg.working_tolerance):
        raise ConsistencyError(f"v({t}; {lam}) = {value} is negative beyond tolerance")
    return value


def integral_v(kernel: KernelSpec, lam: float, T: float,
               cfg: ContourConfig | None = None) -> float:
    """int_0^T v(t; lam) dt, computed exactly as (1 - u(T; lam))/lam."""
    if T <= 0.0:
        raise DomainError("T must be positive")
    return (1.0 - fundamental_u(kernel, lam, T, cfg)) / lam


def convolve_v(kernel: KernelSpec, lam: float, f: Callable[[float], float],
               targets: Sequence[float], cfg: ContourConfig | None = None, *,
               rel_tol: float = 1e-7, initial_cells: int = 64,
               max_cells: int = 65536) -> list[float]:
    """(v(.; lam) * f)(t) for each target t by product integration.

    One mesh on [0, max(targets)], graded quadratically toward the
    singular endpoint sigma = 0 of v, serves every target; the exact
    mass of v over each cell is (u(a) - u(b))/lam, so the only
    discretization error is the midpoint approximation of f.  The mesh
    is refined by doubling until the results stabilize.
    """
    cfg = cfg or ContourConfig()
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    targets = [float(t) for t in targets]
    if not targets or any(t <= 0.0 for t in targets):
        raise DomainError("convolution targets must be positive")
    horizon = max(targets)

    ilt = ContourConfig(
        method=cfg.method,
        nodes=max(24, min(cfg.nodes, 32)),
        working_tolerance=max(min(cfg.working_tolerance, rel_tol / 10.0), 1e-11),
    )

    def u_of(t):
        if t == 0.0:
            return 1.0
        return _cached_invert(kernel, lam, "u", t, ilt)[0]

    def pass_once(cells):
        sigma = [horizon * (i / cells) ** 2 for i in range(cells + 1)]
        u_mesh = [u_of(x) for x in sigma]
        out = []
        for t in targets:
            acc = 0.0
            for i in range(cells):
                a, b = sigma[i], sigma[i + 1]
                if a >= t:
                    break
                if b >= t:
                    weight = (u_mesh[i] - u_of(t)) / lam
                    mid = 0.5 * (a + t)
                else:
                    weight = (u_mesh[i] - u_mesh[i + 1]) / lam
                    mid = 0.5 * (a + b)
                acc += weight * f(t - mid)
            out.append(acc)
        return out

    cells = initial_cells
    prev = pass_once(cells)
    while cells < max_cells:
        cells *= 2
        cur = pass_once(cells)
        scale = max(max(abs(x) for x in cur), 1e-300)
        if max(abs(a - b) for a, b in zip(cur, prev)) <= rel_tol * scale:
            return cur
        prev = cur
    raise QuadratureError("graded-mesh convolution did not converge")


@dataclass(frozen=True)
class RelaxationSolution:
    """Sampled relaxation solutions on a time grid.

    ``solution_values`` carries a*u + v*f when a forced problem was
    solved; for the pure fundamental/impulse sampling it is None.
    """

    kernel: KernelSpec
    lam: float
    t_grid: tuple[float, ...]
    u_values: tuple[float, ...]
    v_values: tuple[float, ...]
    err_u: tuple[float, ...]
    err_v: tuple[float, ...]
    solution_values: tuple[float, ...] | None = None


def _validated_grid(t_grid):
    grid = [float(t) for t in t_grid]
    if not grid or any(t <= 0.0 for t in grid):
        raise DomainError("time grid must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("time grid must be strictly increasing")
    return grid


def sample_solutions(kernel: KernelSpec, lam: float, t_grid: Sequence[float],
                     cfg: ContourConfig | None = None) -> RelaxationSolution:
    """Sample u and v on a grid and verify their structural constraints."""
    cfg = cfg or ContourConfig()
    grid = _validated_grid(t_grid)
    if grid[0] < _V_MIN_TIME:
        raise DomainError(f"grid must start at or above {_V_MIN_TIME}")
    if lam <= 0.0:
        raise DomainError("lam must be positive")
    uu, eu, vv, ev = [], [], [], []
    for t in grid:
        a, b = _cached_invert(kernel, lam, "u", t, cfg)
        uu.append(a)
        eu.append(b)
        a, b = _cached_invert(kernel, lam, "v", t, cfg)
        vv.append(a)
        ev.append(b)
    for i, t in enumerate(grid):
        slack = max(10.0 * eu[i], cfg.working_tolerance)
        if not -slack < uu[i] < 1.0 + slack:
            raise ConsistencyError(f"u out of [0, 1] at t={t}")
        if vv[i] < -max(10.0 * ev[i], cfg.working_tolerance):
            raise ConsistencyError(f"v negative at t={t}")
    for i in range(len(grid) - 1):
        slack = 2.0 * (eu[i] + eu[i + 1]) + 1e-12
        if uu[i + 1] > uu[i] + slack:
            raise ConsistencyError(f"u not decreasing at t={grid[i + 1]}")
        slack = 2.0 * (ev[i] + ev[i + 1]) + 1e-12 * abs(vv[i])
        if vv[i + 1] > vv[i] + slack:
            raise ConsistencyError(f"v not nonincreasing at t={grid[i + 1]}")
    return RelaxationSolution(kernel, lam, tuple(grid), tuple(uu), tuple(vv),
                              tuple(eu), tuple(ev))


def solve_relaxation(kernel: KernelSpec, lam: float, a: float,
                     f: Callable[[float], float] | None,
                     t_grid: Sequence[float],
                     cfg: ContourConfig | None = None, *,
                     rel_tol: float = 1e-7) -> RelaxationSolution:
    """Solve the forced problem: a*u(t; lam) + int_0^t v(t-s) f(s) ds."""
    base = sample_solutions(kernel, lam, t_grid, cfg)
    if f is None:
        combined = tuple(a * u for u in base.u_values)
    else:
        conv = convolve_v(kernel, lam, f, base.t_grid, cfg, rel_tol=rel_tol)
        combined = tuple(a * u + c for u, c in zip(base.u_values, conv))
    return RelaxationSolution(kernel, lam, base.t_grid, base.u_values,
                              base.v_values, base.err_u, base.err_v, combined)


# ----------------------------------------------------------------------
# subordination densities


def _weighted_transform(kernel: KernelSpec, tau: float, with_symbol_factor: bool):
    if with_symbol_factor:
        def transform(s):
            g = kernel.g(s)
            return (g / s) * cexp(-tau * g)
    else:
        def transform(s):
            return cexp(-tau * kernel.g(s))
    return transform


_BROMWICH_MAX_CYCLES = 2500.0


def _bromwich_viable(kernel, tau, t):
    """True when the vertical-line bandwidth stays integrable.

    The line integrand decays like exp(-tau * Re g(g0 + iy)); probing for
    the y where that exponent reaches ~46 bounds the bandwidth and hence
    the number of oscillation periods the quadrature must resolve.
    """
    g0 = 0.5 / t
    y = max(8.0 / t, 8.0)
    for _ in range(64):
        try:
            decay = tau * kernel.g(complex(g0, y)).real
        except (DomainError, OverflowError):
            return False
        if decay > 46.0:
            return t * y / (2.0 * math.pi) <= _BROMWICH_MAX_CYCLES
        y *= 2.0
        if t * y / (2.0 * math.pi) > _BROMWICH_MAX_CYCLES:
            return False
    return False


def _invert_weighted(kernel: KernelSpec, t: float, tau: float,
                     cfg: ContourConfig, with_symbol_factor: bool,
                     abs_floor: float) -> float:
    transform = _weighted_transform(kernel, tau, with_symbol_factor)
    # exp(-tau*g) grows along any left-bent contour once tau is large
    # enough, so prefer a truncated vertical line (where Re g >= 0 keeps
    # the multiplier bounded) whenever its bandwidth is affordable; for
    # small tau the bandwidth explodes like tau**(-1/alpha) and the bent
    # contour, where the multiplier is then harmless, takes over.
    if _bromwich_viable(kernel, tau, t):
        return bromwich_quad(transform, t, abs_tol=max(abs_floor, 1e-10) * 0.5)
    return invert(transform, t, cfg, abs_floor=abs_floor)[0]


def subordination_phi(kernel: KernelSpec, t: float, tau: float,
                      cfg: ContourConfig | None = None, *,
                      abs_floor: float = 1e-10) -> float:
    """Density phi(t, tau) with Laplace transform (g(s)/s) exp(-tau g(s)).

    Probability density in tau for each fixed t > 0; values are checked
    nonnegative up to the inversion noise floor.
    """
    cfg = cfg or ContourConfig()
    if t <= 0.0 or tau <= 0.0:
        raise DomainError("t and tau must be positive")
    value = _invert_weighted(kernel, t, tau, cfg, True, abs_floor)
    if value < -max(1e-8, 100.0 * abs_floor):
        raise ConsistencyError(f"phi({t}, {tau}) = {value} negative beyond tolerance")
    return value


def subordination_psi(kernel: KernelSpec, t: float, tau: float,
                      cfg: ContourConfig | None = None, *,
                      abs_floor: float = 1e-10) -> float:
    """Density psi(t, tau) with Laplace transform exp(-tau g(s)).

    Probability density in t for each fixed tau > 0.
    """
    cfg = cfg or ContourConfig()
    if t <= 0.0 or tau <= 0.0:
        raise DomainError("t and tau must be positive")
    value = _invert_weighted(kernel, t, tau, cfg, False, abs_floor)
    if value < -max(1e-8, 100.0 * abs_floor):
        raise ConsistencyError(f"psi({t}, {tau}) = {value} negative beyond tolerance")
    return value


_TAU_ORIGIN = 1e-8


def _tau_integral(point: Callable[[float], float], residual_tol: float) -> float:
    """Integrate a decaying density over tau in (0, infinity).

    The upper limit doubles until the exponential-rate fit over the last
    octave bounds the remaining tail below ``residual_tol``; the segment
    [0, 1e-8] is restored by one midpoint Richardson step.
    """
    upper = 1.0
    for _ in range(40):
        f_half = point(upper / 2.0)
        f_up = point(upper)
        if f_up < residual_tol and f_half < residual_tol:
            if f_up <= 0.0:
                break
            if 0.0 < f_up < f_half:
                rate = math.log(f_half / f_up) / (upper / 2.0)
                if f_up / rate < residual_tol:
                    break
        upper *= 2.0
    else:
        raise QuadratureError("subordination density tail did not decay")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        main, _ = quad(point, _TAU_ORIGIN, upper, epsabs=residual_tol,
                       epsrel=1e-7, limit=300,
                       points=[upper / 16.0, upper / 4.0, upper / 2.0])
    coarse = _TAU_ORIGIN * point(_TAU_ORIGIN / 2.0)
    fine = 0.5 * _TAU_ORIGIN * (point(_TAU_ORIGIN / 4.0) + point(0.75 * _TAU_ORIGIN))
    origin = (4.0 * fine - coarse) / 3.0
    return main + origin


def phi_total_mass(kernel: KernelSpec, t: float,
                   cfg: ContourConfig | None = None, *,
                   residual_tol: float = 1e-8) -> float:
    """int_0^inf phi(t, tau) d tau; equals 1 for admissible kernels."""
    cfg = cfg or ContourConfig()
    floor = residual_tol / 2.0
    return _tau_integral(
        lambda tau: subordination_phi(kernel, t, tau, cfg, abs_floor=floor),
        residual_tol,
    )


def phi_laplace_in_tau(kernel: KernelSpec, t: float, lam: float,
                       cfg: ContourConfig | None = None, *,
                       residual_tol: float = 1e-8) -> float:
    """int_0^inf phi(t, tau) exp(-lam tau) d tau; equals u(t; lam)."""
    cfg = cfg or ContourConfig()
    if lam < 0.0:
        raise DomainError("lam must be nonnegative")
    floor = residual_tol / 2.0
    return _tau_integral(
        lambda tau: subordination_phi(kernel, t, tau, cfg, abs_floor=floor)
        * math.exp(-lam * tau),
        residual_tol,
    )


def psi_total_mass(kernel: KernelSpec, tau: float,
                   cfg: ContourConfig | None = None, *,
                   tail_tol: float = 1e-2) -> float:
    """int_0^inf psi(t, tau) dt; equals 1.

    The time tail decays only algebraically, so the integral over
    [L, infinity) is estimated from a power fit over the last octave and
    added; accuracy is limited to roughly ``tail_tol``.  Kernels with
    logarithmic-rate symbols (distributed order) have tails too heavy
    for any direct quadrature, and the fit correctly refuses to
    stabilize: QuadratureError.  The identity itself follows from the
    s -> 0 limit of exp(-tau*g(s)) for every admissible kernel.
    """
    cfg = cfg or ContourConfig()

    def point(t):
        return subordination_psi(kernel, t, tau, cfg, abs_floor=5e-9)

    upper = max(8.0 * tau, 8.0)
    tail = math.inf
    for _ in range(24):
        f_half = point(upper / 2.0)
        f_up = point(upper)
        if f_up <= 0.0:
            tail = 0.0
            break
        if 0.0 < f_up < f_half:
            p = math.log(f_half / f_up) / math.log(2.0)
            if p > 1.05:
                tail = f_up * upper / (p - 1.0)
                if tail < tail_tol:
                    break
        upper *= 2.0
    else:
        raise QuadratureError("psi tail estimate did not stabilize")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        main, _ = quad(point, 1e-8, upper, epsabs=1e-8, epsrel=1e-7, limit=400,
                       points=[upper / 16.0, upper / 4.0, upper / 2.0])
    return main + tail


# ----------------------------------------------------------------------
# machine verification of the structural theorem


@dataclass(frozen=True)
class BoundsReport:
    """Observed two-sided bound lower_C <= lam * int_0^T v dt < 1."""

    lam: float
    lam1: float
    T: float
    integral_value: float      # int_0^T v dt
    lower_C: float             # 1 - u(T; lam1)
    pass_lower: bool
    pass_upper: bool

    def __post_init__(self):
        if not 0.0 < self.lower_C < 1.0:
            raise ConsistencyError("lower bound constant must lie in (0, 1)")


@dataclass(frozen=True)
class TheoremReport:
    """Per-property outcome of the relaxation-solution checks."""

    bounds: BoundsReport
    cm_u: bool
    cm_v: bool
    positivity: bool
    derivative_identity: bool
    lambda_monotonicity: bool
    failures: tuple[str, ...]

    @property
    def all_passed(self) -> bool:
        return (self.cm_u and self.cm_v and self.positivity
                and self.derivative_identity and self.lambda_monotonicity
                and self.bounds.pass_lower and self.bounds.pass_upper)


def _divided_difference_violations(grid, values, errs, label):
    """Alternating-sign test for divided differences up to order 4.

    A completely monotone f has (-1)^m f[x_0, ..., x_m] >= 0 on every
    window.  Each window's noise floor is the inversion error bars
    propagated through the difference weights; violations inside the
    floor are not reported.
    """
    failures = []
    n = len(grid)
    for order in range(1, _CM_MAX_ORDER + 1):
        for i in range(n - order):
            xs = grid[i:i + order + 1]
            fs = values[i:i + order + 1]
            es = errs[i:i + order + 1]
            dd = 0.0
            floor = 0.0
            for j in range(order + 1):
                w = 1.0
                for k in range(order + 1):
                    if k != j:
                        w *= xs[j] - xs[k]
                coeff = 1.0 / w
                dd += fs[j] * coeff
                floor += (es[j] + 1e-15 * abs(fs[j])) * abs(coeff)
            if ((-1.0) ** order) * dd < -8.0 * floor:
                failures.append(
                    f"{label}: order-{order} divided difference has wrong sign "
                    f"at t={xs[0]:.6g}"
                )
                break
    return failures


def check_theorem_properties(kernel: KernelSpec, lam: float, lam1: float,
                             T: float, t_grid: Sequence[float],
                             cfg: ContourConfig | None = None) -> TheoremReport:
    """Verify the structural properties of u and v on a geometric grid.

    Requires lam >= lam1 > 0 and at least 32 grid points.  Failures are
    collected with the offending grid point, never raised.
    """
    cfg = cfg or ContourConfig()
    if not lam >= lam1 > 0.0:
        raise DomainError("need lam >= lam1 > 0")
    if T <= 0.0:
        raise DomainError("T must be positive")
    grid = _validated_grid(t_grid)
    if len(grid) < 32:
        raise DomainError("theorem checks need at least 32 grid points")

    failures: list[str] = []

    sol = sample_solutions(kernel, lam, grid, cfg)
    sol1 = sol if lam == lam1 else sample_solutions(kernel, lam1, grid, cfg)

    cm_u_fail = _divided_difference_violations(grid, sol.u_values, sol.err_u, "u")
    cm_v_fail = _divided_difference_violations(grid, sol.v_values, sol.err_v, "v")
    failures += cm_u_fail + cm_v_fail

    positivity = True
    for t, u, v in zip(grid, sol.u_values, sol.v_values):
        if not 0.0 < u < 1.0:
            positivity = False
            failures.append(f"u out of (0, 1) at t={t:.6g}: {u}")
        if not v > 0.0:
            positivity = False
            failures.append(f"v not positive at t={t:.6g}: {v}")

    derivative_ok = True
    for t, v in zip(grid, sol.v_values):
        h = _DERIV_STEP * t
        um2 = fundamental_u(kernel, lam, t - 2 * h, cfg)
        um1 = fundamental_u(kernel, lam, t - h, cfg)
        up1 = fundamental_u(kernel, lam, t + h, cfg)
        up2 = fundamental_u(kernel, lam, t + 2 * h, cfg)
        slope = (-up2 + 8.0 * up1 - 8.0 * um1 + um2) / (12.0 * h)
        if abs(slope + lam * v) > _DERIV_TOL * lam * v:
            derivative_ok = False
            failures.append(
                f"derivative identity off at t={t:.6g}: "
                f"du/dt={slope:.6g}, -lam*v={-lam * v:.6g}"
            )

    mono_ok = True
    for t, u, u1, v, v1 in zip(grid, sol.u_values, sol1.u_values,
                               sol.v_values, sol1.v_values):
        if u > u1 + _LAMBDA_SLACK:
            mono_ok = False
            failures.append(f"u(t; lam) > u(t; lam1) at t={t:.6g}")
        if v > v1 + _LAMBDA_SLACK * max(1.0, v1):
            mono_ok = False
            failures.append(f"v(t; lam) > v(t; lam1) at t={t:.6g}")

    integral = integral_v(kernel, lam, T, cfg)
    lower_c = 1.0 - fundamental_u(kernel, lam1, T, cfg)
    lam_int = lam * integral
    bounds = BoundsReport(
        lam=lam, lam1=lam1, T=T,
        integral_value=integral,
        lower_C=lower_c,
        pass_lower=lam_int >= lower_c - _LAMBDA_SLACK,
        pass_upper=lam_int < 1.0,
    )
    if not bounds.pass_lower:
        failures.append(f"lower bound violated: lam*int v = {lam_int} < C = {lower_c}")
    if not bounds.pass_upper:
        failures.append(f"upper bound violated: lam*int v = {lam_int} >= 1")

    return TheoremReport(
        bounds=bounds,
        cm_u=not cm_u_fail,
        cm_v=not cm_v_fail,
        positivity=positivity,
        derivative_identity=derivative_ok,
        lambda_monotonicity=mono_ok,
        failures=tuple(failures),
    )

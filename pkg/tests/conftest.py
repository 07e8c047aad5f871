"""Shared fixtures and independent oracles.

The oracle helpers here deliberately avoid every code path of the
package under test: Mittag-Leffler values come from brute-force series
summation in mpmath working precision, integrals from quadrature of
closed forms.
"""
import math

import mpmath as mp
import pytest
from scipy.special import gammaln

from genfrac import ContourConfig, KernelSpec


def _ml_series_fixed_dps(alpha: float, beta: float, z: float, dps: int) -> mp.mpf:
    with mp.workdps(dps):
        total = mp.mpf(0)
        zk = mp.mpf(1)
        zm = mp.mpf(z)
        peak = mp.mpf(1)
        # form gamma arguments in mpf: double-rounded alpha*k would shift
        # the huge terms enough to survive the cancellation
        am = mp.mpf(alpha)
        bm = mp.mpf(beta)
        k = 0
        while True:
            term = zk / mp.gamma(am * k + bm)
            total += term
            peak = max(peak, abs(term))
            zk *= zm
            k += 1
            if k > 16 and abs(term) < mp.eps * peak / 1e5:
                return total
            if k > 500000:
                raise RuntimeError("oracle series did not converge")


def ml_series_oracle(alpha: float, beta: float, z: float, dps: int = 80) -> float:
    """Brute-force Mittag-Leffler series in extended precision.

    The working precision is set from the largest term's magnitude (the
    cancellation cost of the alternating series) and the result is
    accepted only when two different precisions agree.  Arguments whose
    cancellation exceeds ~1500 digits are handed to the independent
    integral oracle instead.
    """
    if z < -1.0:
        # largest-term magnitude scan, cheap in doubles
        k_peak = int(max(0.0, ((-z) ** (1.0 / alpha) - beta) / alpha))
        peak_log10 = max(
            k * math.log10(-z) - float(gammaln(alpha * k + beta)) / math.log(10.0)
            for k in range(max(0, k_peak - 3), k_peak + 4)
        )
        dps = max(dps, int(max(peak_log10, 0.0)) + 60)
        if dps > 300 and 0.0 < alpha < 1.0:
            return ml_integral_oracle(alpha, beta, z)
    first = _ml_series_fixed_dps(alpha, beta, z, dps)
    second = _ml_series_fixed_dps(alpha, beta, z, dps + 25)
    with mp.workdps(40):
        if first == 0 and second == 0:
            return 0.0
        if abs(first - second) > mp.mpf("1e-25") * abs(second):
            raise RuntimeError("oracle series did not stabilize in precision")
    return float(second)


def ml_integral_oracle(alpha: float, beta: float, z: float, dps: int = 60) -> float:
    """E(alpha, beta; z) for z < 0, 0 < alpha < 1 by mpmath quadrature of
    the real-line spectral representation (independent implementation)."""
    assert 0.0 < alpha < 1.0 and z < 0.0
    if beta >= 1.0 + alpha - 1e-12:
        inner = ml_integral_oracle(alpha, beta - alpha, z, dps)
        with mp.workdps(dps):
            return float((mp.mpf(inner) - mp.rgamma(beta - alpha)) / z)
    with mp.workdps(dps):
        a, b, zz = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
        spb = mp.sin(mp.pi * (1 - b))
        spba = mp.sin(mp.pi * (1 - b + a))
        cpa = mp.cos(mp.pi * a)

        def integrand(u):
            if u <= 0:
                return mp.mpf(0)
            r = u ** a
            num = r * spb - zz * spba
            den = r * r - 2 * r * zz * cpa + zz * zz
            return u ** (a - b) * mp.exp(-u) * num / den

        val = mp.quad(integrand, [0, 1, 10, 50, mp.inf], maxdegree=10)
        return float(val / mp.pi)


def ml_fundamental_oracle(alpha: float, lam: float, t: float, dps: int = 80) -> float:
    if t == 0.0:
        return 1.0
    return ml_series_oracle(alpha, 1.0, -lam * t ** alpha, dps=dps)


def ml_impulse_oracle(alpha: float, lam: float, t: float, dps: int = 80) -> float:
    return t ** (alpha - 1.0) * ml_series_oracle(alpha, alpha, -lam * t ** alpha, dps=dps)


def geometric_grid(lo: float, hi: float, n: int) -> list[float]:
    ratio = (hi / lo) ** (1.0 / (n - 1))
    return [lo * ratio ** i for i in range(n)]


@pytest.fixture(scope="session")
def corpus_kernels():
    """The three built-in admissible kernels exercised everywhere."""
    return {
        "single": KernelSpec.single_term(0.5),
        "multi": KernelSpec.multi_term([(1.0, 0.8), (0.5, 0.3)]),
        "distributed": KernelSpec.distributed_uniform(),
    }


@pytest.fixture(scope="session")
def tight_cfg():
    return ContourConfig(nodes=48, working_tolerance=1e-10)


@pytest.fixture(scope="session")
def default_cfg():
    return ContourConfig()


def rel_err(value: float, exact: float) -> float:
    if exact == 0.0:
        return abs(value)
    return abs(value - exact) / abs(exact)


assert math.isclose(ml_series_oracle(1.0, 1.0, -2.0), math.exp(-2.0), rel_tol=1e-13)

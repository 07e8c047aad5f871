"""Contour inversion against closed-form transform pairs."""
import cmath
import math

import mpmath as mp
import pytest

from genfrac import AccuracyError, ContourConfig, DomainError, invert, invert_grid
from genfrac.laplace import _hyperbolic_sum, _talbot_sum

from conftest import geometric_grid, ml_series_oracle, rel_err

TIGHT = ContourConfig(nodes=48, working_tolerance=1e-11)


class TestClosedForms:
    def test_constant(self):
        value, err = invert(lambda s: 1.0 / s, 1.0, TIGHT)
        assert value == pytest.approx(1.0, rel=1e-11)
        assert err < 1e-10

    def test_exponential(self):
        value, _ = invert(lambda s: 1.0 / (s + 2.0), 1.0, TIGHT)
        assert value == pytest.approx(math.exp(-2.0), rel=1e-11)

    def test_inverse_sqrt(self):
        value, _ = invert(lambda s: s ** (-0.5), 1.0, TIGHT)
        assert value == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-11)

    def test_single_term_relaxation_transform(self):
        # transform of the order-0.6 relaxation decay at unit rate
        value, _ = invert(lambda s: s ** (-0.4) / (s ** 0.6 + 1.0), 1.0, TIGHT)
        exact = ml_series_oracle(0.6, 1.0, -1.0)
        assert value == pytest.approx(exact, rel=1e-10)

    def test_domain_error_nonpositive_time(self):
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, 0.0, TIGHT)
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, -1.0, TIGHT)


class TestGrid:
    def test_constant_on_grid(self):
        out = invert_grid(lambda s: 1.0 / s, [0.5, 1.0, 2.0], TIGHT)
        for value, _ in out:
            assert value == pytest.approx(1.0, rel=1e-11)

    def test_ramp_on_grid(self):
        out = invert_grid(lambda s: 1.0 / (s * s), [1.0, 2.0, 3.0], TIGHT)
        for t, (value, _) in zip([1.0, 2.0, 3.0], out):
            assert value == pytest.approx(t, rel=1e-11)

    def test_exponential_three_decades(self):
        ts = [0.1, 1.0, 10.0]
        out = invert_grid(lambda s: 1.0 / (s + 1.0), ts, TIGHT)
        for t, (value, _) in zip(ts, out):
            assert value == pytest.approx(math.exp(-t), rel=1e-11)

    def test_grid_agrees_with_pointwise(self):
        ts = geometric_grid(1e-2, 1e2, 9)
        grid_out = invert_grid(lambda s: 1.0 / (s + 1.0) ** 2, ts, TIGHT)
        for t, (value, _) in zip(ts, grid_out):
            single, _ = invert(lambda s: 1.0 / (s + 1.0) ** 2, t, TIGHT)
            assert value == single  # same deterministic path

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            invert_grid(lambda s: 1.0 / s, [1.0, 1.0], TIGHT)
        with pytest.raises(DomainError):
            invert_grid(lambda s: 1.0 / s, [-1.0, 1.0], TIGHT)


class TestRationalExactness:
    @pytest.mark.parametrize("t", geometric_grid(1e-3, 1e3, 7))
    def test_two_pole_mixture(self, t):
        a1, b1, a2, b2 = 0.7, 0.25, 0.3, 2.0
        exact = a1 * math.exp(-b1 * t) + a2 * math.exp(-b2 * t)
        value, _ = invert(
            lambda s: a1 / (s + b1) + a2 / (s + b2), t,
            ContourConfig(nodes=48, working_tolerance=1e-10),
        )
        assert rel_err(value, exact) < 1e-10


class TestErrorEstimation:
    def test_node_doubling_improves_estimate(self):
        # in the resolution-limited regime the halving estimate drops
        # when the node count doubles
        for transform in (lambda s: 1.0 / (s + 1.0),
                          lambda s: s ** (-0.5),
                          lambda s: 1.0 / (s * s + s)):
            v16, _ = _talbot_sum(transform, 1.0, 16)
            v8, _ = _talbot_sum(transform, 1.0, 8)
            v32, _ = _talbot_sum(transform, 1.0, 32)
            est16 = abs(v16 - v8)
            est32 = abs(v32 - v16)
            assert est32 < est16

    def test_estimate_bounds_true_error(self):
        value, err = invert(lambda s: 1.0 / (s + 1.0), 2.0, TIGHT)
        assert abs(value - math.exp(-2.0)) <= 10.0 * max(err, 1e-16)

    def test_unreachable_tolerance_raises(self):
        # sin(s)/s grows exponentially along the bent contour, so the
        # quadrature can never stabilize
        with pytest.raises(AccuracyError):
            invert(lambda s: cmath.sin(complex(s)) / s, 1.0,
                   ContourConfig(nodes=16, working_tolerance=1e-10))


class TestConjugateSymmetry:
    def test_full_two_sided_sum_is_real(self):
        # summing both half contours explicitly: the imaginary residue
        # must vanish to rounding for a real-symmetric transform
        transform = lambda s: 1.0 / (s + 1.0)  # noqa: E731
        m, t = 32, 1.0
        r = 0.4 * m
        total = complex(math.exp(r) * transform(complex(r / t, 0.0)), 0.0)
        for j in range(1, m):
            theta = j * math.pi / m
            cot = math.cos(theta) / math.sin(theta)
            s = (r / t) * theta * complex(cot, 1.0)
            w = complex(1.0, theta * (1.0 + cot * cot) - cot)
            term = cmath.exp(t * s) * transform(s) * w
            sbar = s.conjugate()
            wbar = w.conjugate()
            term_bar = cmath.exp(t * sbar) * transform(sbar) * wbar
            total += term + term_bar
        value = (1.0 / (5.0 * t)) * total
        assert abs(value.imag) < 1e-10 * abs(value.real)

    def test_asymmetric_transform_rejected(self):
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / (s + 1.0j), 1.0, TIGHT)


class TestHyperbolic:
    CFG = ContourConfig(method="hyperbolic", nodes=32, working_tolerance=1e-9)

    def test_exponential(self):
        value, _ = invert(lambda s: 1.0 / (s + 2.0), 1.0, self.CFG)
        assert value == pytest.approx(math.exp(-2.0), rel=1e-9)

    def test_branch_cut_transform(self):
        value, _ = invert(lambda s: s ** (-0.5), 0.5, self.CFG)
        assert value == pytest.approx(1.0 / math.sqrt(math.pi * 0.5), rel=1e-9)

    def test_node_doubling(self):
        transform = lambda s: 1.0 / (s + 1.0)  # noqa: E731
        v16, _ = _hyperbolic_sum(transform, 1.0, 16)
        v8, _ = _hyperbolic_sum(transform, 1.0, 8)
        v32, _ = _hyperbolic_sum(transform, 1.0, 32)
        assert abs(v32 - v16) < abs(v16 - v8)


class TestExtendedPrecisionEscalation:
    def test_small_values_resolved_relatively(self):
        # t*exp(-t) at t = 60 is ~5.3e-25: far below the double-precision
        # noise floor of the contour sum, reachable only through the
        # extended-precision path
        cfg = ContourConfig(nodes=48, working_tolerance=1e-11)
        value, err = invert(lambda s: 1.0 / (s + 1.0) ** 2, 60.0, cfg)
        with mp.workdps(40):
            exact = mp.mpf(60) * mp.exp(mp.mpf(-60))
            assert float(abs(mp.mpf(value) - exact) / exact) < 1e-10

    def test_config_validation(self):
        with pytest.raises(DomainError):
            ContourConfig(nodes=4)
        with pytest.raises(DomainError):
            ContourConfig(working_tolerance=0.5)
        with pytest.raises(DomainError):
            ContourConfig(method="bromwich")

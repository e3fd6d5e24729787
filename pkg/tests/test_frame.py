import math

import numpy as np
import pytest

from adiaspin.errors import DegenerateFieldError, InvalidInputError
from adiaspin.fields import Constant, FieldSample, Rotating, RosenZener, Sampled, relabel_axes
from adiaspin.frame import (
    b_function,
    beta_integral,
    frame_states,
    gamma0_limits,
    gamma0_rate,
    nu_gamma0,
    omega_and_Omega_sq,
    phi_at,
    phi_dot,
    unwrapped_phi,
)


class TestBetaIntegral:
    def test_constant(self):
        assert beta_integral(Constant((0, 0, 2)), 0.0, 0.5) == pytest.approx(1.0, abs=1e-14)

    def test_zero_interval(self):
        assert beta_integral(RosenZener(1.5, 1, 1), 0.3, 0.3) == 0.0

    def test_relabeled_rosen_zener(self):
        m = RosenZener(1.5, 1, 1, "x->z")
        assert beta_integral(m, -10, 10) == pytest.approx(30.0, abs=1e-10)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            beta_integral(Constant((0, 0, 1)), 0, 1, tol=0)


class TestUnwrappedPhi:
    def test_rotating(self):
        t = np.linspace(0, 20, 41)
        assert np.allclose(unwrapped_phi(Rotating(1, 1, 2), 0.0, t), t, atol=1e-12)

    def test_rosen_zener(self):
        t0 = -3.0
        t = np.linspace(-3, 3, 13)
        expected = 0.5 * (np.arctan(1 / np.cosh(t) / 1.5) - np.arctan(1 / np.cosh(t0) / 1.5))
        assert np.allclose(unwrapped_phi(RosenZener(1.5, 1, 1), t0, t), expected, atol=1e-14)

    def test_constant_azimuth(self):
        assert np.allclose(unwrapped_phi(Constant((1, 1, 0)), 0.0, [0, 1, 2]), 0.0)

    def test_gauge_and_coarse_grid(self):
        m = Rotating(0.0, 1.0, 7.0, 0.3)
        t = np.array([0.0, 5.0, 10.0])
        phi = unwrapped_phi(m, 0.0, t)
        assert phi[0] == 0.0
        assert np.allclose(phi, 3.5 * t, atol=1e-12)

    def test_derivative_matches_phi_dot(self):
        m = RosenZener(1.5, 2, 1)
        t = np.linspace(-4, 4, 801)
        phi = unwrapped_phi(m, -4.0, t)
        num = np.gradient(phi, t, edge_order=2)
        pd = phi_dot(m.sample(t))
        assert np.max(np.abs(num - pd)) < 1e-4 * max(np.max(np.abs(pd)), 1)

    def test_degenerate(self):
        with pytest.raises(DegenerateFieldError):
            unwrapped_phi(Constant((0, 0, 1)), 0.0, [0, 1])

    def test_phi_at_matches_grid(self):
        m = Rotating(0.3, 1.0, -9.0, 1.0)
        assert phi_at(m, 0.0, 4.0) == pytest.approx(unwrapped_phi(m, 0.0, [4.0])[0], abs=1e-12)


class TestPhiDot:
    def test_rotating(self):
        assert phi_dot(Rotating(1, 1, 2).sample(0.4)) == pytest.approx(1.0, abs=1e-15)

    def test_parallel_rate(self):
        s = FieldSample(0.0, np.array([1.0, 2.0, 0.5]), np.array([2.0, 4.0, -1.0]))
        assert phi_dot(s) == 0.0

    def test_rosen_zener_midpoint(self):
        assert phi_dot(RosenZener(1.5, 1, 1).sample(0.0)) == 0.0

    def test_degenerate(self):
        with pytest.raises(DegenerateFieldError):
            phi_dot(Constant((0, 0, 1)).sample(0.0))


class TestNuGamma0:
    def test_phi_dot_equals_bz(self):
        s = Rotating(1, 1, 2).sample(0.0)
        assert nu_gamma0(s, 1.0).gamma0 == pytest.approx(math.pi / 2, abs=1e-15)

    def test_rotating(self):
        s = Rotating(1, 1, 2).sample(0.0)
        assert nu_gamma0(s, phi_dot(s)).nu == pytest.approx(1.0, abs=1e-15)

    def test_static(self):
        s = Constant((0.3, -0.4, 1.2)).sample(0.0)
        assert nu_gamma0(s, 0.0).nu == pytest.approx(1.3, abs=1e-15)

    def test_static_gamma0(self):
        ng = nu_gamma0(Constant((1, 0, 1)).sample(0.0), 0.0)
        assert ng.gamma0 == pytest.approx(3 * math.pi / 4, abs=1e-15)

    def test_degenerate_limit(self):
        ng = nu_gamma0(Constant((0, 0, 2)).sample(0.0), 0.0)
        assert ng.degenerate and ng.gamma0 == pytest.approx(math.pi)
        assert gamma0_limits() == (0.0, math.pi)

    def test_identities_random(self, rng):
        for _ in range(200):
            b, d = rng.normal(size=3), rng.normal(size=3)
            s = FieldSample(0.0, b, d)
            pd = phi_dot(s)
            ng = nu_gamma0(s, pd)
            bperp = math.hypot(b[0], b[1])
            assert ng.nu**2 == pytest.approx((pd - b[2]) ** 2 + bperp**2, rel=1e-12)
            assert 0 < ng.gamma0 < math.pi
            assert bperp / math.tan(ng.gamma0) == pytest.approx(pd - b[2], rel=1e-10, abs=1e-12)


class TestOmega:
    def test_constant(self):
        om, big = omega_and_Omega_sq(Constant((1, 0, 1)), 0.0)
        assert om == pytest.approx(1.0) and big == pytest.approx(2.0)

    def test_rotating(self):
        om, big = omega_and_Omega_sq(Rotating(0.5, 1.2, 3.0), 1.1)
        assert om == pytest.approx(0.5 - 1.5, abs=1e-14)
        assert big == pytest.approx(1.2**2 + 1.0, abs=1e-13)

    def test_rosen_zener_against_finite_difference_of_b(self):
        # omega = -i b'/(2b) with b = B_perp exp(2i beta - 2i phi)
        m = RosenZener(1.5, 1, 1)
        t, h = 1.0, 1e-4

        def b_at(s):
            beta = beta_integral(m, 0.0, s, 1e-14)
            return b_function(m, s, beta)

        fd = -1j * (b_at(t + h) - b_at(t - h)) / (2 * h) / (2 * b_at(t))
        om, big = omega_and_Omega_sq(m, t)
        assert abs(om - fd) < 1e-6 * abs(om)
        assert abs(big.imag) > 1e-3

    def test_omega_dot_against_finite_difference(self):
        m = RosenZener(1.5, 1, 1, "x->z")
        t, h = 0.7, 1e-4
        om_p, _ = omega_and_Omega_sq(m, t + h)
        om_m, _ = omega_and_Omega_sq(m, t - h)
        om, big = omega_and_Omega_sq(m, t)
        s = m.sample(t)
        bperp = math.hypot(s.b[0], s.b[1])
        om_dot = (om_p - om_m) / (2 * h)
        assert big == pytest.approx(bperp**2 + om**2 + 1j * om_dot, rel=1e-7)


def test_gamma0_rate_matches_finite_difference():
    m = RosenZener(2.0, 1.0, 1.0)
    t, h = 0.8, 1e-5

    def g0(s):
        smp = m.sample(s)
        return nu_gamma0(smp, phi_dot(smp)).gamma0

    fd = (g0(t + h) - g0(t - h)) / (2 * h)
    assert gamma0_rate(m, t) == pytest.approx(fd, rel=1e-7)


def test_frame_states():
    m = RosenZener(1.5, 1, 1)
    states = frame_states(m, -2.0, np.linspace(-2, 2, 5))
    assert states[0].phi == 0.0 and states[0].beta == 0.0
    for s in states:
        assert s.nu**2 == pytest.approx((s.phi_dot - s.b_z) ** 2 + s.b_perp**2, rel=1e-10)
        assert 0 < s.gamma0 < math.pi


def test_gamma0_continuous_along_trajectory():
    m = relabel_axes(RosenZener(1.5, 2, 1), "x->z")
    t = np.linspace(-10, 10, 4001)
    s = m.sample(t)
    g = nu_gamma0(s, phi_dot(s)).gamma0
    assert np.max(np.abs(np.diff(g))) < 0.05

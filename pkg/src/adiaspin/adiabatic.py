"""Adiabatic propagator built from quadratures.

The propagator is written as a z-rotation into a rotating frame followed
by a rotation by ``2 alpha`` about a unit axis ``n``::

    U = R_z(alpha1) R_n(alpha),   R_z(a) = diag(e^{ia}, e^{-ia}),
    R_n(a) = cos(a) I - i sin(a) (n . sigma),   alpha1 = -phi + delta / 2.

In the adiabatic approximation ``alpha = int nu``, ``gamma = gamma0(t)`` and
``delta = 0``.

Conventions (pinned by requiring exactness for a stationary rotating
field against its closed-form propagator):

* the axis is ``n = (sin g cos d, sin g sin d, -cos g)``.  With the z
  component ``+cos g`` the stationary case is not reproduced.  With
  ``-cos g`` the exact angle equations for ``(alpha, gamma, delta)`` hold
  with the ``gamma0`` of :mod:`adiaspin.frame`.
* ``phi`` is measured from its value at ``t0`` (the "gauge"), so that
  ``U(t0, t0) = I``.  The lab-frame answer is the gauge-frame one
  conjugated by ``rot_z(Phi0)``, where ``Phi0`` is the lab azimuth of the
  transverse field at ``t0``.
* the linearized correction of gamma is
  ``gamma0(t) - [int gamma0'(s) sin^2 alpha(s) ds] / sin^2 alpha(t)``,
  which is the solution of ``gamma' = 2 (gamma0 - gamma) alpha' cot(alpha)``
  (the sign follows from that equation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import _quat
from ._cheb import CumulativeIntegral
from .errors import InvalidInputError
from .fields import FieldModel
from .frame import (
    beta_integral,
    gamma0_rate,
    nu_gamma0,
    phi_at,
    phi_dot,
    quad,
    unwrapped_phi,
)
from .su2 import Su2, compose, rot_z

#: below this value of sin^2(alpha) the linearized correction is switched off
EPS_SIN = 1e-3

CORRECTIONS = ("none", "linearized")


@dataclass(frozen=True)
class PrecessionAngles:
    alpha: float
    gamma: float
    delta: float
    alpha1: float

    @property
    def axis(self) -> np.ndarray:
        return axis_vector(self.gamma, self.delta)


@dataclass(frozen=True)
class AdiabaticResult:
    u_gauge: Su2
    u_lab: Su2
    angles: PrecessionAngles
    corrected: bool
    #: lab azimuth of the transverse field at t0 (the gauge rotation angle)
    gauge_azimuth: float = 0.0
    fast_path: bool = False


def axis_vector(gamma, delta) -> np.ndarray:
    return np.array(
        [math.sin(gamma) * math.cos(delta), math.sin(gamma) * math.sin(delta), -math.cos(gamma)]
    )


def assemble(angles: PrecessionAngles) -> Su2:
    """``R_z(alpha1) R_n(alpha)`` as an SU(2) element; ``|U21| = sin(alpha) sin(gamma)``."""
    if not (-1e-12 <= angles.gamma <= math.pi + 1e-12):
        raise InvalidInputError("gamma must lie in [0, pi]")
    rz = np.array([math.cos(angles.alpha1), 0.0, 0.0, -math.sin(angles.alpha1)])
    sa = math.sin(angles.alpha)
    rn = np.concatenate([[math.cos(angles.alpha)], sa * axis_vector(angles.gamma, angles.delta)])
    return Su2.from_array(_quat.qmul(rz, rn))


def gauge_rotation(m: FieldModel, t0: float) -> tuple:
    """``(G, Phi0)`` with ``u_lab = G u_gauge G^dag``."""
    b = m.field(float(t0))
    azimuth = math.atan2(b[1], b[0])
    return rot_z(azimuth), azimuth


def _nu(m):
    def f(t):
        s = m.sample(t)
        return nu_gamma0(s, phi_dot(s)).nu

    return f


def _gamma0(m, t):
    s = m.sample(t)
    return nu_gamma0(s, phi_dot(s)).gamma0


def _longitudinal_angles(m, t0, t, quad_tol):
    beta = beta_integral(m, t0, t, quad_tol)
    b = m.field(float(t))
    gamma = math.pi if b[2] > 0 else 0.0
    return PrecessionAngles(alpha=0.0, gamma=gamma, delta=0.0, alpha1=-beta)


def adiabatic_angles(m: FieldModel, t0: float, t: float, quad_tol: float = 1e-10) -> PrecessionAngles:
    """Quadrature angles at ``t`` in the ``phi(t0) = 0`` gauge.

    A purely longitudinal field is redirected to the exact diagonal
    propagator, expressed as ``alpha = 0`` and ``alpha1 = -beta``.
    """
    t0, t = float(t0), float(t)
    if m.is_longitudinal():
        return _longitudinal_angles(m, t0, t, quad_tol)
    alpha = quad(_nu(m), t0, t, quad_tol, "nu integral")
    return PrecessionAngles(alpha=alpha, gamma=_gamma0(m, t), delta=0.0, alpha1=-phi_at(m, t0, t))


def _correction_integrals(m, t0, t_eval, quad_tol):
    """alpha(t) and int gamma0' sin^2 alpha on ``t_eval`` (ascending, > t0)."""
    t_eval = np.asarray(t_eval, dtype=float)
    t1 = float(t_eval[-1])
    tol = max(quad_tol * 1e-2, 1e-15)

    def nu(t):
        s = m.sample(t)
        return nu_gamma0(s, phi_dot(s)).nu

    alpha = CumulativeIntegral(nu, t0, t1, tol)
    if m.stationary_frame():
        # gamma0 is exactly constant; skip its noisy derivative
        return alpha(t_eval), np.zeros(len(t_eval))
    numerator = CumulativeIntegral(lambda t: gamma0_rate(m, t) * np.sin(alpha(t)) ** 2, t0, t1, tol)
    return alpha(t_eval), numerator(t_eval)


def _corrected_gamma(gamma0, alpha, numerator):
    s2 = math.sin(alpha) ** 2
    if s2 < EPS_SIN:
        return gamma0
    return min(max(gamma0 - numerator / s2, 0.0), math.pi)


def propagate_adiabatic(m: FieldModel, t0: float, t: float, quad_tol: float = 1e-10,
                        correction: str = "none", gauge: bool = True) -> AdiabaticResult:
    """Approximate ``U(t, t0)``.

    ``correction="linearized"`` replaces ``gamma0(t)`` by its first-order
    corrected value.  ``gauge=False`` uses the un-gauged rotating-frame
    angle (``delta(t0) = phi(t0)`` with ``phi`` the lab half-azimuth), which
    leaves a z-rotation offset at ``t0``; it exists for comparison only.
    """
    if correction not in CORRECTIONS:
        raise InvalidInputError(f"correction must be one of {CORRECTIONS}")
    t0, t = float(t0), float(t)
    if m.is_longitudinal():
        angles = _longitudinal_angles(m, t0, t, quad_tol)
        u = assemble(angles)
        return AdiabaticResult(u, u, angles, False, 0.0, True)
    angles = adiabatic_angles(m, t0, t, quad_tol)
    corrected = False
    if correction == "linearized" and t > t0:
        a, num = _correction_integrals(m, t0, np.array([t]), quad_tol)
        angles = replace(angles, gamma=_corrected_gamma(angles.gamma, float(a[-1]), float(num[-1])))
        corrected = True
    g, azimuth = gauge_rotation(m, t0)
    if not gauge:
        phi0 = 0.5 * azimuth
        raw = replace(angles, delta=phi0, alpha1=angles.alpha1 - phi0 + 0.5 * phi0)
        u = assemble(raw)
        return AdiabaticResult(u, u, raw, corrected, azimuth, False)
    u_gauge = assemble(angles)
    u_lab = compose(compose(g, u_gauge), g.conjugate())
    return AdiabaticResult(u_gauge, u_lab, angles, corrected, azimuth, False)


def propagate_adiabatic_trajectory(m: FieldModel, t0: float, t_grid, quad_tol: float = 1e-10,
                                   correction: str = "none") -> list:
    """:func:`propagate_adiabatic` on an ascending grid, sharing the quadratures."""
    if correction not in CORRECTIONS:
        raise InvalidInputError(f"correction must be one of {CORRECTIONS}")
    t0 = float(t0)
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if len(grid) and (np.any(np.diff(grid) < 0) or grid[0] < t0):
        raise InvalidInputError("t_grid must be ascending and start at or after t0")
    if m.is_longitudinal():
        return [propagate_adiabatic(m, t0, t, quad_tol) for t in grid]
    nu = _nu(m)
    alphas = np.empty(len(grid))
    prev_t, acc = t0, 0.0
    for i, t in enumerate(grid):
        acc += quad(nu, prev_t, float(t), quad_tol, "nu integral")
        prev_t = float(t)
        alphas[i] = acc
    phis = unwrapped_phi(m, t0, grid)
    s = m.sample(grid)
    gamma0 = np.atleast_1d(nu_gamma0(s, phi_dot(s)).gamma0)
    gammas = gamma0.copy()
    if correction == "linearized":
        later = grid > t0
        if np.any(later):
            a, num = _correction_integrals(m, t0, grid[later], quad_tol)
            idx = np.flatnonzero(later)
            for j, k in enumerate(idx):
                gammas[k] = _corrected_gamma(gamma0[k], float(a[j]), float(num[j]))
    g, azimuth = gauge_rotation(m, t0)
    out = []
    for i in range(len(grid)):
        angles = PrecessionAngles(float(alphas[i]), float(gammas[i]), 0.0, -float(phis[i]))
        u_gauge = assemble(angles)
        u_lab = compose(compose(g, u_gauge), g.conjugate())
        out.append(AdiabaticResult(u_gauge, u_lab, angles, correction != "none", azimuth, False))
    return out


class GammaProfile(NamedTuple):
    t: np.ndarray
    alpha: np.ndarray
    gamma0: np.ndarray
    gamma_corrected: np.ndarray


def gamma_correction_profile(m: FieldModel, t0: float, t_grid, quad_tol: float = 1e-10) -> GammaProfile:
    """``gamma0(t)`` next to its linearized correction on an ascending grid."""
    t0 = float(t0)
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(grid) < 0) or (len(grid) and grid[0] < t0):
        raise InvalidInputError("t_grid must be ascending and start at or after t0")
    s = m.sample(grid)
    gamma0 = np.atleast_1d(nu_gamma0(s, phi_dot(s)).gamma0).astype(float)
    alpha = np.zeros(len(grid))
    corrected = gamma0.copy()
    later = grid > t0
    if np.any(later):
        a, num = _correction_integrals(m, t0, grid[later], quad_tol)
        idx = np.flatnonzero(later)
        alpha[idx] = a
        for j, k in enumerate(idx):
            corrected[k] = _corrected_gamma(gamma0[k], float(a[j]), float(num[j]))
    return GammaProfile(grid, alpha, gamma0, corrected)

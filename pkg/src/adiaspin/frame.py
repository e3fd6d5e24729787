"""Derived scalar quantities along a field trajectory.

``beta`` is the accumulated longitudinal phase, ``phi`` is *half* the
azimuth of the transverse field (continuous, gauge-fixed so that
``phi(t0) = 0``), ``nu`` is the precession rate about the effective axis
and ``gamma0`` that axis' polar angle, branch (0, pi).  ``omega`` and
``Omega_sq`` are the complex frequency and squared frequency of the
oscillator reduction for ``f = b^{-1/2} xi``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import BranchTrackingError, DegenerateFieldError, QuadratureError
from .fields import FieldModel, FieldSample

#: relative threshold below which the transverse field counts as zero
EPS_PERP = 1e-12


def transverse(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return np.hypot(b[..., 0], b[..., 1])


def _check_transverse(b, what="frame quantity"):
    bperp = transverse(b)
    bmag = np.linalg.norm(b, axis=-1)
    bad = bperp <= EPS_PERP * bmag
    if np.any(bad) or np.any(bmag == 0.0):
        raise DegenerateFieldError(
            f"transverse field vanishes; {what} is undefined",
            b_perp=float(np.min(bperp)),
        )
    return bperp


def quad(f, a, b, tol, what="integral"):
    """Adaptive Gauss-Kronrod quadrature with an absolute error target."""
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        res = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=2000, full_output=1)
    value, abserr = res[0], res[1]
    if not math.isfinite(value) or (len(res) > 3 and abserr > 10 * tol):
        raise QuadratureError(
            f"{what} did not converge", a=a, b=b, estimate=value, abserr=abserr, tol=tol
        )
    return float(value)


def beta_integral(m: FieldModel, t0: float, t: float, tol: float = 1e-10) -> float:
    """Longitudinal phase ``beta = int_{t0}^{t} B_z``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    return quad(lambda s: float(m.field(s)[2]), float(t0), float(t), tol, "beta integral")


def phi_dot(s: FieldSample):
    """Half the angular velocity of the transverse field about z."""
    b, d = np.asarray(s.b), np.asarray(s.db_dt)
    bperp = _check_transverse(b, "phi_dot")
    cross = b[..., 0] * d[..., 1] - d[..., 0] * b[..., 1]
    out = cross / (2.0 * bperp**2)
    return float(out) if np.ndim(out) == 0 else out


class NuGamma0(NamedTuple):
    nu: float
    gamma0: float
    degenerate: bool


def nu_gamma0(s: FieldSample, phi_dot_value) -> NuGamma0:
    """``nu = sqrt((phi_dot - B_z)^2 + B_perp^2)`` and ``cot gamma0 = (phi_dot - B_z) / B_perp``.

    With a vanishing transverse field the limit 0 or pi (by the sign of
    ``phi_dot - B_z``) is reported and flagged degenerate.
    """
    b = np.asarray(s.b)
    bperp = transverse(b)
    x = phi_dot_value - b[..., 2]
    nu = np.hypot(x, bperp)
    gamma0 = np.arctan2(bperp, x)
    degenerate = np.any(bperp <= EPS_PERP * np.linalg.norm(b, axis=-1))
    if np.ndim(nu) == 0:
        return NuGamma0(float(nu), float(gamma0), bool(degenerate))
    return NuGamma0(nu, gamma0, bool(degenerate))


def gamma0_limits() -> tuple:
    """Both readings of gamma0 for a purely longitudinal field.

    The (0, pi) branch gives pi for ``phi_dot - B_z < 0`` while the
    textbook statement for that case is ``gamma0 = 0``.  The assembled
    propagators avoid the question entirely (they take an exact fast path),
    so both values are exposed for inspection.
    """
    return (0.0, math.pi)


class Kinematics(NamedTuple):
    b: np.ndarray
    db: np.ndarray
    bperp: np.ndarray
    bperp_dot: np.ndarray
    bperp_ddot: np.ndarray
    phi_dot: np.ndarray
    phi_ddot: np.ndarray


def kinematics(m: FieldModel, t, h: float = 1e-4) -> Kinematics:
    """Transverse magnitude, half-azimuth rate and their derivatives at ``t``."""
    t = np.asarray(t, dtype=float)
    s = m.sample(t)
    b, d, c = s.b, s.db_dt, m.curvature(t, h)
    bperp = _check_transverse(b)
    bp_dot = (b[..., 0] * d[..., 0] + b[..., 1] * d[..., 1]) / bperp
    bp_ddot = (
        d[..., 0] ** 2 + d[..., 1] ** 2 + b[..., 0] * c[..., 0] + b[..., 1] * c[..., 1]
    ) / bperp - bp_dot**2 / bperp
    cross = b[..., 0] * d[..., 1] - d[..., 0] * b[..., 1]
    cross_dot = b[..., 0] * c[..., 1] - c[..., 0] * b[..., 1]
    pd = cross / (2 * bperp**2)
    pdd = cross_dot / (2 * bperp**2) - cross * bp_dot / bperp**3
    return Kinematics(b, d, bperp, bp_dot, bp_ddot, pd, pdd)


def gamma0_rate(m: FieldModel, t, h: float = 1e-4):
    """Time derivative of gamma0 by the chain rule on ``atan2(B_perp, phi_dot - B_z)``."""
    k = kinematics(m, t, h)
    x = k.phi_dot - k.b[..., 2]
    x_dot = k.phi_ddot - k.db[..., 2]
    out = (x * k.bperp_dot - k.bperp * x_dot) / (k.bperp**2 + x**2)
    return float(out) if np.ndim(out) == 0 else out


def omega_and_Omega_sq(m: FieldModel, t, h: float = 1e-4):
    """``omega = B_z - phi_dot - (i/4) d/dt log B_perp^2`` and ``Omega^2 = B_perp^2 + omega^2 + i omega_dot``.

    Derivatives come from the model's analytic first and second
    derivatives; ``h`` is only used by models that fall back to finite
    differences for the second derivative.
    """
    k = kinematics(m, t, h)
    omega = k.b[..., 2] - k.phi_dot - 0.5j * k.bperp_dot / k.bperp
    omega_dot = (
        k.db[..., 2] - k.phi_ddot - 0.5j * (k.bperp_ddot / k.bperp - (k.bperp_dot / k.bperp) ** 2)
    )
    big = k.bperp**2 + omega**2 + 1j * omega_dot
    if np.ndim(omega) == 0:
        return complex(omega), complex(big)
    return omega, big


def b_function(m: FieldModel, t, beta):
    """Complex transverse drive ``b = (B_x - i B_y) e^{2 i beta}``."""
    f = m.field(t)
    return (f[..., 0] - 1j * f[..., 1]) * np.exp(2j * np.asarray(beta))


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def unwrapped_phi(m: FieldModel, t0: float, t_grid, max_refine: int = 60) -> np.ndarray:
    """Continuous ``phi`` on ``t_grid`` with ``phi(t0) = 0``.

    ``2 phi = atan2(B_y, B_x)`` is followed across branch cuts on a grid
    refined until every step changes ``2 phi`` by less than pi/2 and agrees
    with the trapezoid estimate from ``phi_dot``.
    """
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    ts = np.unique(np.concatenate([[float(t0)], grid]))
    for _ in range(max_refine):
        s = m.sample(ts)
        _check_transverse(s.b, "phi")
        raw = np.arctan2(s.b[:, 1], s.b[:, 0])
        pd = phi_dot(s) if len(ts) > 1 else np.zeros(1)
        diff = _wrap(np.diff(raw))
        est = (pd[1:] + pd[:-1]) * np.diff(ts)
        bad = (np.abs(diff) >= np.pi / 2) | (np.abs(est) >= np.pi / 2) | (np.abs(diff - est) > np.pi / 4)
        if not np.any(bad):
            break
        mids = 0.5 * (ts[:-1][bad] + ts[1:][bad])
        ts = np.unique(np.concatenate([ts, mids]))
    else:
        raise BranchTrackingError("phi unwrapping did not settle", points=len(ts))
    twice = raw[0] + np.concatenate([[0.0], np.cumsum(diff)])
    twice -= twice[np.searchsorted(ts, t0)]
    return 0.5 * twice[np.searchsorted(ts, grid)]


def phi_at(m: FieldModel, t0: float, t: float) -> float:
    """Single-point ``phi(t)`` in the ``phi(t0) = 0`` gauge.

    The branch is picked by a coarse quadrature of ``phi_dot``; the value
    itself comes from ``atan2`` and is exact to rounding.
    """
    if t == t0:
        return 0.0
    s0, s1 = m.sample(t0), m.sample(t)
    _check_transverse(s0.b, "phi")
    _check_transverse(s1.b, "phi")
    est = 2.0 * quad(lambda u: phi_dot(m.sample(u)), t0, t, 1e-7, "phi_dot integral")
    d = math.atan2(s1.b[1], s1.b[0]) - math.atan2(s0.b[1], s0.b[0])
    k = round((est - d) / (2 * math.pi))
    return 0.5 * (d + 2 * math.pi * k)


@dataclass(frozen=True)
class FrameState:
    t: float
    beta: float
    phi: float
    phi_dot: float
    b_perp: float
    b_z: float
    nu: float
    gamma0: float
    omega: complex
    omega_sq_cap: complex


def frame_states(m: FieldModel, t0: float, t_grid, tol: float = 1e-10) -> list:
    """FrameState rows on an ascending grid (gauge ``phi(t0) = 0``)."""
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    phis = unwrapped_phi(m, t0, grid)
    betas = np.empty(len(grid))
    prev_t, prev_beta = float(t0), 0.0
    for i, t in enumerate(grid):
        prev_beta += beta_integral(m, prev_t, float(t), tol)
        prev_t = float(t)
        betas[i] = prev_beta
    s = m.sample(grid)
    pd = phi_dot(s)
    ng = nu_gamma0(s, pd)
    omega, big = omega_and_Omega_sq(m, grid)
    bperp = transverse(s.b)
    return [
        FrameState(
            t=float(grid[i]), beta=float(betas[i]), phi=float(phis[i]), phi_dot=float(pd[i]),
            b_perp=float(bperp[i]), b_z=float(s.b[i, 2]), nu=float(ng.nu[i]),
            gamma0=float(ng.gamma0[i]), omega=complex(omega[i]), omega_sq_cap=complex(big[i]),
        )
        for i in range(len(grid))
    ]

"""Exact equations of motion for the rotation angles (alpha, gamma, delta).

In the gauge frame, with ``nu`` and ``gamma0`` from :mod:`adiaspin.frame`::

    alpha' sin(gamma) = nu sin(2 gamma - gamma0)
    gamma' tan(alpha) = 2 nu sin(gamma0 - gamma)
    delta' sin(gamma) = 2 nu sin(gamma0 - gamma)

with ``alpha = 0``, ``gamma = gamma0``, ``delta = 0`` at ``t0``.  The start is
a 0/0 point of the gamma equation; the first short step uses the
linearized solution ``gamma - gamma0(t) ~ -gamma0' (t - t0) / 3``, and the
resulting error is damped as ``(tau0 / tau)^2`` by the equation itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .adiabatic import PrecessionAngles
from .errors import GimbalError, NumericError
from .exact import DEFAULT_CONFIG, IntegratorConfig
from .fields import FieldModel
from .frame import NuGamma0, gamma0_rate, nu_gamma0, phi_dot, quad, unwrapped_phi
from .su2 import Su2

GIMBAL_SIN = 1e-6
_DEGENERATE_AXIS = 1e-9


@dataclass(frozen=True)
class AngleTrajectory:
    grid: np.ndarray
    angles: list
    gamma0: np.ndarray
    nu: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _frame(m, t):
    """Scalar ``(nu, gamma0)``; same formulas as :func:`adiaspin.frame.nu_gamma0`, without array overhead."""
    s = m.sample(t)
    bx, by, bz = s.b.tolist()
    dx, dy, _ = s.db_dt.tolist()
    perp2 = bx * bx + by * by
    if perp2 == 0.0:
        return nu_gamma0(s, phi_dot(s))
    x = (bx * dy - dx * by) / (2.0 * perp2) - bz
    bperp = math.sqrt(perp2)
    return NuGamma0(math.hypot(x, bperp), math.atan2(bperp, x), False)


def _frame_fn(m, t0):
    if m.stationary_frame():
        fixed = _frame(m, t0)
        return lambda t: fixed
    return lambda t: _frame(m, t)


def _rhs(frame):
    def rhs(t, y):
        alpha, gamma, delta = y
        nu, g0, _ = frame(t)
        sg = math.sin(gamma)
        drive = 2.0 * nu * math.sin(g0 - gamma)
        # gamma = gamma0 exactly is a fixed point, including at sin(alpha) = 0
        cot_drive = 0.0 if drive == 0.0 else drive * math.cos(alpha) / math.sin(alpha)
        return [nu * math.sin(2.0 * gamma - g0) / sg, cot_drive, drive / sg]

    return rhs


def _gimbal_event(t, y):
    return abs(math.sin(y[1])) - GIMBAL_SIN


_gimbal_event.terminal = True


def _start(m, frame, t0, t1):
    nu0, g0, _ = frame(t0)
    tau = min(1e-4 / max(nu0, 1e-300), 1e-2 * (t1 - t0))
    rate = 0.0 if m.stationary_frame() else gamma0_rate(m, t0)
    alpha = quad(lambda s: frame(s).nu, t0, t0 + tau, 1e-15, "start quadrature")
    gamma = frame(t0 + tau).gamma0 - rate * tau / 3.0
    delta = 2.0 * nu0 * rate * tau**2 / (6.0 * math.sin(g0))
    return t0 + tau, [alpha, gamma, delta]


def _ode_tolerances(cfg):
    return max(cfg.rel_tol * 1e-2, 3e-14), max(cfg.abs_tol * 1e-2, 1e-15)


def _residuals(frame, sol, t_start):
    """Max ODE residuals over the solver steps, from polynomial fits of the dense output."""
    worst = np.zeros(3)
    ts = sol.t
    nodes = np.cos(np.linspace(0.0, np.pi, 12))
    for a, b in zip(ts[:-1], ts[1:]):
        if b <= t_start or b == a:
            continue
        x = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        y = sol.sol(x)
        coeffs = np.polynomial.chebyshev.chebfit(nodes, y.T, 7)
        probe = np.array([-0.5, 0.0, 0.5])
        yp = np.polynomial.chebyshev.chebval(probe, coeffs)
        dyp = np.polynomial.chebyshev.chebval(probe, np.polynomial.chebyshev.chebder(coeffs)) * 2.0 / (b - a)
        tp = 0.5 * (a + b) + 0.5 * (b - a) * probe
        for j, t in enumerate(tp):
            al, ga, _ = yp[:, j]
            dal, dga, dde = dyp[:, j]
            nu, g0, _ = frame(t)
            r = np.array([
                dal * math.sin(ga) - nu * math.sin(2 * ga - g0),
                # gamma equation multiplied through by cos(alpha): regular at tan poles
                dga * math.sin(al) - 2 * nu * math.sin(g0 - ga) * math.cos(al),
                dde * math.sin(ga) - 2 * nu * math.sin(g0 - ga),
            ]) / nu
            worst = np.maximum(worst, np.abs(r))
    return worst


def integrate_angles(m: FieldModel, t0: float, t1: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                     t_grid=None, check_residuals: bool = True) -> AngleTrajectory:
    """Integrate the exact angle equations on ``[t0, t1]`` (gauge ``phi(t0) = 0``).

    Output is on ``t_grid`` when given, else on the solver's own steps.
    Raises :class:`GimbalError` when ``sin(gamma)`` drops below 1e-6.
    """
    t0, t1 = float(t0), float(t1)
    frame = _frame_fn(m, t0)
    nu0, g0, _ = frame(t0)
    first = PrecessionAngles(0.0, g0, 0.0, 0.0)
    if t1 == t0:
        return AngleTrajectory(np.array([t0]), [first], np.array([g0]), np.array([nu0]),
                               {"residual_alpha": 0.0, "residual_gamma": 0.0, "residual_delta": 0.0})
    if t1 < t0:
        raise ValueError("integrate_angles integrates forward only")
    if abs(math.sin(g0)) < GIMBAL_SIN:
        raise GimbalError("initial axis lies in the sin(gamma) ~ 0 chart singularity", t=t0, gamma0=g0)
    t_start, y0 = _start(m, frame, t0, t1)
    rtol, atol = _ode_tolerances(cfg)
    sol = solve_ivp(_rhs(frame), (t_start, t1), y0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=True, events=_gimbal_event)
    if sol.status == 1:
        raise GimbalError("trajectory entered the sin(gamma) ~ 0 chart singularity",
                          t=float(sol.t_events[0][0]), t0=t0, t1=t1)
    if sol.status != 0:
        raise NumericError("angle integration failed", message=sol.message, t=float(sol.t[-1]))
    grid = np.concatenate([[t0], sol.t]) if t_grid is None else np.asarray(t_grid, dtype=float)
    phis = unwrapped_phi(m, t0, grid)
    angles = []
    for t, ph in zip(grid, phis):
        if t <= t_start:
            # inside the series step: interpolate linearly from the exact start data
            w = (t - t0) / (t_start - t0)
            a, g, d = (1 - w) * np.array([0.0, g0, 0.0]) + w * np.asarray(y0)
        else:
            a, g, d = sol.sol(t)
        angles.append(PrecessionAngles(float(a), float(g), float(d), float(-ph + 0.5 * d)))
    s = m.sample(grid)
    ng = nu_gamma0(s, phi_dot(s))
    diagnostics = {"steps": int(len(sol.t)), "t_start": t_start}
    if check_residuals:
        r = _residuals(frame, sol, t_start)
        diagnostics.update(residual_alpha=float(r[0]), residual_gamma=float(r[1]), residual_delta=float(r[2]))
    return AngleTrajectory(grid, angles, np.atleast_1d(ng.gamma0), np.atleast_1d(ng.nu), diagnostics)


def extract_angles(u: Su2, phi_t: float, hint: PrecessionAngles | None = None) -> PrecessionAngles:
    """Solve ``u = +-R_z(-phi_t + delta/2) R_n(alpha)`` for ``(alpha, gamma, delta)``.

    ``alpha`` and ``gamma`` are returned in ``[0, pi]`` and ``delta`` in
    ``(-pi, pi]``.  Where the axis azimuth (or the whole axis) is not
    observable, the corresponding values are taken from ``hint``.
    """
    cp, sp = math.cos(phi_t), math.sin(phi_t)
    # p = R_z(phi_t) u = R_z(delta/2) R_n(alpha)
    w, x, y, z = u.w, u.x, u.y, u.z
    p = np.array([cp * w + sp * z, cp * x + sp * y, cp * y - sp * x, cp * z - sp * w])
    transverse = math.hypot(p[1], p[2])
    if transverse >= _DEGENERATE_AXIS:
        half = math.atan2(p[2], p[1])
        if half > math.pi / 2 or half <= -math.pi / 2:
            p = -p
            half = math.atan2(p[2], p[1])
        delta = 2.0 * half
    else:
        delta = hint.delta if hint is not None else 0.0
        half = 0.5 * delta
    c, s = math.cos(half), math.sin(half)
    cos_a = c * p[0] - s * p[3]
    s_cos_g = -(s * p[0] + c * p[3])
    if transverse >= _DEGENERATE_AXIS:
        s_sin_g = transverse
    else:
        s_sin_g = 0.0
    sin_a = math.hypot(s_sin_g, s_cos_g)
    alpha = math.atan2(sin_a, cos_a)
    if sin_a < _DEGENERATE_AXIS:
        gamma = hint.gamma if hint is not None else 0.5 * math.pi
    else:
        gamma = math.atan2(s_sin_g, s_cos_g)
    return PrecessionAngles(alpha, gamma, delta, -phi_t + 0.5 * delta)

"""Complex-frequency oscillator form of the Cayley-Klein equations.

With ``b = (B_x - i B_y) e^{2 i beta}`` the amplitude ``f = b^{-1/2} xi``
obeys ``f'' + Omega^2 f = 0``.  This module builds ``f`` from the exact
``(xi, eta, beta)`` solution and checks that equation residually with a
fourth-order central second difference.  Nothing here integrates the
oscillator forward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchTrackingError, InvalidInputError
from .exact import DEFAULT_CONFIG, IntegratorConfig, propagate_xi_eta_trajectory
from .fields import FieldModel
from .frame import _check_transverse, b_function, omega_and_Omega_sq

MIN_POINTS = 64
_EDGE = 2  # points lost at each end by the five-point stencil


@dataclass(frozen=True)
class OscillatorTrace:
    """``f``, ``Omega^2`` and the residual on a uniform grid.

    ``residual`` is NaN on the two points at each end, where the stencil
    does not fit.
    """

    grid: np.ndarray
    f: np.ndarray
    Omega_sq: np.ndarray
    residual: np.ndarray

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def max_residual(self) -> float:
        return float(np.nanmax(np.abs(self.residual)))

    def normalized_residual(self) -> float:
        """``max|residual| / (max|Omega^2| * max|f|)``."""
        scale = np.max(np.abs(self.Omega_sq)) * np.max(np.abs(self.f))
        return self.max_residual() / scale


def second_difference(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central second derivative; NaN on the two end points each side."""
    out = np.full(y.shape, np.nan, dtype=y.dtype if np.iscomplexobj(y) else float)
    out[2:-2] = (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)
    return out


def _track_phase(b: np.ndarray, rate: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Continuous phase of ``b``, each step taken on the branch nearest the predicted increment."""
    raw = np.angle(b)
    predicted = 0.5 * (rate[1:] + rate[:-1]) * np.diff(grid)
    jump = raw[1:] - raw[:-1] - predicted
    steps = (jump + np.pi) % (2 * np.pi) - np.pi + predicted
    bad = np.flatnonzero(np.abs(steps) >= 0.5 * math.pi)
    if len(bad):
        k = int(bad[0])
        raise BranchTrackingError(
            "phase of b moves by pi/2 or more between grid points; refine the grid",
            t=float(grid[k]), step=float(steps[k]), n_points=len(grid),
        )
    return raw[0] + np.concatenate([[0.0], np.cumsum(steps)])


def build_trace(m: FieldModel, t0: float, t1: float, n_points: int,
                cfg: IntegratorConfig = DEFAULT_CONFIG) -> OscillatorTrace:
    """Construct ``f = b^{-1/2} xi`` and the oscillator residual on ``n_points`` uniform points."""
    if n_points < MIN_POINTS:
        raise InvalidInputError(f"n_points must be >= {MIN_POINTS}")
    if not t1 > t0:
        raise InvalidInputError("build_trace requires t1 > t0")
    grid = np.linspace(float(t0), float(t1), int(n_points))
    _check_transverse(m.field(grid), "oscillator reduction")
    cks = propagate_xi_eta_trajectory(m, t0, grid, cfg)
    xi = np.array([c.xi for c in cks])
    beta = np.array([c.beta for c in cks])
    b = b_function(m, grid, beta)
    omega, big = omega_and_Omega_sq(m, grid)
    # d/dt arg b = 2 Re(omega)
    phase = _track_phase(b, 2.0 * omega.real, grid)
    f = np.abs(b) ** -0.5 * np.exp(-0.5j * phase) * xi
    residual = second_difference(f, grid[1] - grid[0]) + big * f
    return OscillatorTrace(grid, f, big, residual)


def trace_rows(trace: OscillatorTrace):
    """Rows ``(t, Re f, Im f, Re Omega^2, Im Omega^2, |residual|)``."""
    return np.column_stack([
        trace.grid, trace.f.real, trace.f.imag,
        trace.Omega_sq.real, trace.Omega_sq.imag, np.abs(trace.residual),
    ])


TRACE_HEADER = ("t", "re_f", "im_f", "re_Omega_sq_rad2_per_t2", "im_Omega_sq_rad2_per_t2", "abs_residual")

"""Bloch vectors, spin-flip probabilities and propagator comparisons."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .su2 import Spinor, Su2, fidelity_error

FRAMES = ("lab", "gauge")
W_FLOOR = 1e-300
#: both flip probabilities below this are reported as negligible, not as a ratio
W_NEGLIGIBLE = 1e-14


@dataclass(frozen=True)
class FlipConvention:
    """Polarization axis for a flip probability.

    ``frame="gauge"`` means ``axis`` is given in the gauge frame, whose x
    axis points along the transverse field at ``t0``; :meth:`lab_axis`
    converts it given that azimuth.
    """

    axis: tuple
    frame: str = "lab"
    name: str = ""

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        if a.shape != (3,) or not np.all(np.isfinite(a)):
            raise InvalidInputError("axis must be a finite 3-vector")
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise InvalidInputError("axis must have unit length within 1e-12")
        if self.frame not in FRAMES:
            raise InvalidInputError(f"frame must be one of {FRAMES}")
        object.__setattr__(self, "axis", tuple(float(c) for c in a))

    def lab_axis(self, gauge_azimuth: float = 0.0) -> np.ndarray:
        a = np.asarray(self.axis)
        if self.frame == "lab":
            return a
        c, s = math.cos(gauge_azimuth), math.sin(gauge_azimuth)
        return np.array([c * a[0] - s * a[1], s * a[0] + c * a[1], a[2]])


def bloch_vector(s: Spinor) -> np.ndarray:
    """``(<sx>, <sy>, <sz>)`` of a normalized spinor."""
    u, d = s.up, s.down
    cross = u.conjugate() * d
    return np.array([2 * cross.real, 2 * cross.imag, abs(u) ** 2 - abs(d) ** 2])


def flip_probability(u: Su2, conv: FlipConvention, gauge_azimuth: float = 0.0) -> float:
    """``|<-a|U|+a>|^2`` for the eigenstates of ``a . sigma``.

    For ``U = w - i v . sigma`` this is ``|v x a|^2``.
    """
    a = conv.lab_axis(gauge_azimuth)
    v = np.array([u.x, u.y, u.z])
    c = np.cross(v, a)
    return float(min(max(c @ c, 0.0), 1.0))


@dataclass(frozen=True)
class Comparison:
    fidelity_error: float
    w_exact: float
    w_approx: float
    w_rel_err: float
    both_negligible: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def compare(u_exact: Su2, u_approx: Su2, conv: FlipConvention, gauge_azimuth: float = 0.0) -> Comparison:
    """Fidelity error and flip probabilities of an approximation against a reference."""
    we = flip_probability(u_exact, conv, gauge_azimuth)
    wa = flip_probability(u_approx, conv, gauge_azimuth)
    rel = abs(wa - we) / max(we, W_FLOOR)
    return Comparison(
        fidelity_error(u_exact, u_approx), we, wa, rel,
        both_negligible=max(we, wa) < W_NEGLIGIBLE,
    )

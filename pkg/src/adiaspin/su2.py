"""SU(2) propagators, spinors and Cayley-Klein parameters.

A propagator is held as a unit quaternion ``(w, x, y, z)`` standing for the
matrix ``U = w*I - i*(x*sx + y*sy + z*sz)``.  Determinant one is therefore
structural and re-normalization is a single division.  Any physical global
phase is discarded; every quantity computed downstream is phase-insensitive.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _quat
from .errors import InvalidInputError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_NORM_TOL = 1e-8


@dataclass(frozen=True)
class Su2:
    """Unit quaternion representation of an SU(2) matrix."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if not math.isfinite(n) or abs(n - 1.0) > _NORM_TOL:
            raise InvalidInputError(f"Su2 requires a unit quaternion, got norm {n!r}")

    @classmethod
    def from_array(cls, q) -> Su2:
        """Build from any 4-vector, normalizing it."""
        q = np.asarray(q, dtype=float)
        n = float(np.linalg.norm(q))
        if not math.isfinite(n) or n == 0.0:
            raise InvalidInputError("cannot normalize a zero or non-finite quaternion")
        q = q / n
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]))

    @classmethod
    def from_matrix(cls, m) -> Su2:
        """Project a 2x2 unitary onto SU(2), dropping its global phase."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidInputError(f"expected a 2x2 matrix, got shape {m.shape}")
        det = np.linalg.det(m)
        if abs(det) < 1e-12:
            raise InvalidInputError("matrix is singular")
        m = m / np.sqrt(det)
        a, b = m[0, 0], m[0, 1]
        return cls.from_array([a.real, -b.imag, -b.real, -a.imag])

    @classmethod
    def identity(cls) -> Su2:
        return cls(1.0, 0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [[complex(w, -z), complex(-y, -x)], [complex(y, -x), complex(w, z)]]
        )

    def conjugate(self) -> Su2:
        """Inverse element (Hermitian adjoint)."""
        return Su2(self.w, -self.x, -self.y, -self.z)

    def __matmul__(self, other: Su2) -> Su2:
        return compose(self, other)

    def __neg__(self) -> Su2:
        return Su2(-self.w, -self.x, -self.y, -self.z)

    @property
    def norm_error(self) -> float:
        return abs(math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2) - 1.0)


@dataclass(frozen=True)
class Spinor:
    up: complex
    down: complex

    def __post_init__(self):
        n = math.sqrt(abs(self.up) ** 2 + abs(self.down) ** 2)
        if not math.isfinite(n) or abs(n - 1.0) > _NORM_TOL:
            raise InvalidInputError(f"Spinor requires unit norm, got {n!r}")

    @classmethod
    def normalized(cls, up, down) -> Spinor:
        n = math.sqrt(abs(up) ** 2 + abs(down) ** 2)
        if n == 0.0 or not math.isfinite(n):
            raise InvalidInputError("cannot normalize a zero spinor")
        return cls(complex(up) / n, complex(down) / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=complex)


@dataclass(frozen=True)
class CayleyKlein:
    """The pair (xi, eta) together with the longitudinal phase beta."""

    xi: complex
    eta: complex
    beta: float

    @property
    def norm_error(self) -> float:
        return abs(abs(self.xi) ** 2 + abs(self.eta) ** 2 - 1.0)


def compose(a: Su2, b: Su2) -> Su2:
    """Matrix product ``a @ b`` (``b`` acts first), renormalized."""
    return Su2.from_array(_quat.qmul(a.as_array(), b.as_array()))


def rot_z(angle: float) -> Su2:
    """Bloch-sphere rotation by ``angle`` about z, i.e. ``exp(-i angle sz / 2)``."""
    return Su2(math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2))


def axis_angle(axis, angle: float) -> Su2:
    """``exp(-i (angle/2) n . sigma)`` for a (not necessarily unit) axis."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    s = math.sin(angle / 2)
    return Su2.from_array([math.cos(angle / 2), *(s * n)])


def from_rotation_matrix(r) -> Su2:
    """SU(2) element G with ``G (m . sigma) G^dag = (R m) . sigma``."""
    from scipy.spatial.transform import Rotation

    xyzw = Rotation.from_matrix(np.asarray(r, dtype=float)).as_quat()
    return Su2.from_array([xyzw[3], xyzw[0], xyzw[1], xyzw[2]])


def rotation_matrix(u: Su2) -> np.ndarray:
    """The SO(3) image of ``u`` acting on Bloch vectors."""
    w, x, y, z = u.w, u.x, u.y, u.z
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def from_cayley_klein(ck: CayleyKlein) -> Su2:
    """Assemble U with ``U11 = xi e^{-i beta}`` and ``U12 = conj(eta) e^{-i beta}``."""
    if not (math.isfinite(abs(ck.xi)) and math.isfinite(abs(ck.eta))):
        raise InvalidInputError("non-finite Cayley-Klein parameters")
    if ck.norm_error > _NORM_TOL:
        raise InvalidInputError(
            f"|xi|^2 + |eta|^2 deviates from 1 by {ck.norm_error:.3e}"
        )
    phase = cmath.exp(-1j * ck.beta)
    a = ck.xi * phase
    b = ck.eta.conjugate() * phase
    return Su2.from_array([a.real, -b.imag, -b.real, -a.imag])


def to_cayley_klein(u: Su2, beta: float) -> CayleyKlein:
    """Inverse of :func:`from_cayley_klein` for a caller-supplied ``beta``."""
    u11 = complex(u.w, -u.z)
    u21 = complex(u.y, -u.x)
    return CayleyKlein(
        xi=u11 * cmath.exp(1j * beta), eta=-u21 * cmath.exp(-1j * beta), beta=float(beta)
    )


def apply(u: Su2, s: Spinor) -> Spinor:
    """psi -> U psi."""
    out = u.matrix() @ s.as_array()
    return Spinor.normalized(out[0], out[1])


def fidelity_error(u: Su2, v: Su2) -> float:
    """Phase-insensitive distance ``sqrt(1 - (|tr(U^dag V)| / 2)^2)``.

    Evaluated as the sine of the angle between the two quaternions, which
    avoids the cancellation in ``1 - d**2`` and stays accurate down to
    machine precision.
    """
    return float(_quat.qsin_angle(u.as_array(), v.as_array()))

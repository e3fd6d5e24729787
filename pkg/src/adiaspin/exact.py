"""Reference solution of ``i dU/dt = (B . sigma) U`` on SU(2).

Each step is a product of exact exponentials of ``B . sigma`` sampled at
Gauss points: the exponential midpoint rule (order 2) or the
commutator-free fourth-order Magnus scheme.  Step size is controlled by
step doubling.  The whole interval is cut into panels that are refined by
bisection; every refinement level is evaluated as one vectorized batch, so
the oracle is fast without giving up local error control.

A second, independent route integrates the Cayley-Klein pair ``(xi, eta)``
with a generic Runge-Kutta solver; the two must agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import _quat
from .errors import InvalidInputError, NumericError, StiffnessError
from .fields import FieldModel
from .su2 import CayleyKlein, Su2

SCHEMES = ("exponential-midpoint", "commutator-free-4th-order")
_ORDER = {"exponential-midpoint": 2, "commutator-free-4th-order": 4}

_SQ3 = math.sqrt(3.0)
_C1, _C2 = 0.5 - _SQ3 / 6, 0.5 + _SQ3 / 6
_A1, _A2 = 0.25 - _SQ3 / 6, 0.25 + _SQ3 / 6
_ROUNDING_FLOOR = 2e-15
_MAX_PANELS = 2_000_000


@dataclass(frozen=True)
class IntegratorConfig:
    """Oracle accuracy settings.

    Per panel of width ``h`` and rotation angle ``theta`` the step-doubling
    estimate must satisfy ``err <= abs_tol * h / L + rel_tol * theta``
    (``L`` the interval length), so the accumulated error is bounded by
    roughly ``abs_tol + rel_tol * (total rotation angle)``.
    ``max_step=None`` means ``L / 50``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float | None = None
    scheme: str = "commutator-free-4th-order"

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not (0.0 < v <= 1e-2):
                raise InvalidInputError(f"{name} must lie in (0, 1e-2], got {v!r}")
        if self.max_step is not None and not self.max_step > 0:
            raise InvalidInputError("max_step must be positive")
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")

    @property
    def order(self) -> int:
        return _ORDER[self.scheme]

    def scaled(self, factor: float) -> IntegratorConfig:
        return IntegratorConfig(self.rel_tol * factor, self.abs_tol * factor, self.max_step, self.scheme)


DEFAULT_CONFIG = IntegratorConfig()


def step_quaternions(m: FieldModel, ta, h, scheme: str):
    """One scheme step per panel ``[ta, ta + h]``; returns (quaternions, rotation angles)."""
    ta = np.asarray(ta, dtype=float)
    h = np.asarray(h, dtype=float)
    if scheme == "exponential-midpoint":
        bm = m.field(ta + 0.5 * h)
        v = h[:, None] * bm
        return _quat.qexp(v), np.linalg.norm(v, axis=-1)
    b1 = m.field(ta + _C1 * h)
    b2 = m.field(ta + _C2 * h)
    first = _quat.qexp(h[:, None] * (_A2 * b1 + _A1 * b2))
    second = _quat.qexp(h[:, None] * (_A1 * b1 + _A2 * b2))
    theta = 0.5 * h * (np.linalg.norm(b1, axis=-1) + np.linalg.norm(b2, axis=-1))
    return _quat.qmul(second, first), theta


@dataclass
class _Panels:
    start: np.ndarray
    width: np.ndarray
    q: np.ndarray
    tag: np.ndarray


def _refine(m, edges, cfg: IntegratorConfig, length: float, stats: dict):
    """Adaptive panels covering consecutive ``edges``; ``tag`` is the edge interval index."""
    max_step = cfg.max_step if cfg.max_step is not None else length / 50.0
    starts, widths, tags = [], [], []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if b == a:
            continue
        n = max(1, math.ceil((b - a) / max_step - 1e-9))
        e = np.linspace(a, b, n + 1)
        starts.append(e[:-1])
        widths.append(np.diff(e))
        tags.append(np.full(n, i))
    if not starts:
        return _Panels(np.zeros(0), np.zeros(0), np.zeros((0, 4)), np.zeros(0, dtype=int))
    ta = np.concatenate(starts)
    h = np.concatenate(widths)
    tag = np.concatenate(tags)
    min_width = 1e-12 * length
    done = []
    evaluations = 0
    while len(ta):
        if np.any(h < min_width):
            bad = float(ta[np.argmin(h)])
            raise StiffnessError("step size underflow", t=bad, min_width=min_width, scheme=cfg.scheme)
        if len(ta) + sum(len(p.start) for p in done) > _MAX_PANELS:
            raise StiffnessError("too many panels", panels=len(ta), scheme=cfg.scheme)
        full, _ = step_quaternions(m, ta, h, cfg.scheme)
        half_h = 0.5 * h
        left, th_l = step_quaternions(m, ta, half_h, cfg.scheme)
        right, th_r = step_quaternions(m, ta + half_h, half_h, cfg.scheme)
        two = _quat.qmul(right, left)
        evaluations += 3 * len(ta)
        err = _quat.qdistance(full, two)
        allowed = cfg.abs_tol * h / length + cfg.rel_tol * (th_l + th_r)
        # below this the estimate is pure rounding noise
        allowed = np.maximum(allowed, _ROUNDING_FLOOR)
        ok = err <= allowed
        if np.any(ok):
            done.append(_Panels(ta[ok], h[ok], _quat.qnormalize(two[ok]), tag[ok]))
        bad = ~ok
        if not np.any(bad):
            break
        ta_b, h_b, tag_b = ta[bad], half_h[bad], tag[bad]
        ta = np.concatenate([ta_b, ta_b + h_b])
        h = np.concatenate([h_b, h_b])
        tag = np.concatenate([tag_b, tag_b])
    start = np.concatenate([p.start for p in done])
    order = np.argsort(start, kind="stable")
    panels = _Panels(
        start[order],
        np.concatenate([p.width for p in done])[order],
        np.concatenate([p.q for p in done])[order],
        np.concatenate([p.tag for p in done])[order],
    )
    stats["panels"] = stats.get("panels", 0) + len(start)
    stats["step_evaluations"] = stats.get("step_evaluations", 0) + evaluations
    stats["min_step"] = float(np.min(panels.width))
    return panels


def _forward(m, t0, t1, cfg, stats):
    panels = _refine(m, np.array([t0, t1]), cfg, t1 - t0, stats)
    return _quat.reduce_product(panels.q)


def propagate(m: FieldModel, t0: float, t1: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
              stats: dict | None = None) -> Su2:
    """U(t1, t0).  ``t1 < t0`` is handled by inverting the forward propagator."""
    stats = {} if stats is None else stats
    t0, t1 = float(t0), float(t1)
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise InvalidInputError("times must be finite")
    if t1 == t0:
        return Su2.identity()
    if t1 < t0:
        return Su2.from_array(_forward(m, t1, t0, cfg, stats)).conjugate()
    return Su2.from_array(_forward(m, t0, t1, cfg, stats))


def propagate_trajectory(m: FieldModel, t0: float, t_grid, cfg: IntegratorConfig = DEFAULT_CONFIG,
                         stats: dict | None = None) -> list:
    """``[U(t_i, t0) for t_i in t_grid]`` for an ascending grid starting at or after ``t0``."""
    stats = {} if stats is None else stats
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if len(grid) == 0:
        return []
    if np.any(np.diff(grid) < 0) or grid[0] < t0:
        raise InvalidInputError("t_grid must be ascending and start at or after t0")
    edges = np.concatenate([[float(t0)], grid])
    length = float(edges[-1] - edges[0])
    if length == 0.0:
        return [Su2.identity() for _ in grid]
    panels = _refine(m, edges, cfg, length, stats)
    scan = _quat.prefix_products(panels.q)
    out = []
    for i in range(len(grid)):
        # last panel belonging to an interval at or before i
        k = np.searchsorted(panels.tag, i, side="right") - 1
        out.append(Su2.identity() if k < 0 else Su2.from_array(scan[k]))
    return out


def propagate_fixed(m: FieldModel, t0: float, t1: float, n_steps: int,
                    scheme: str = "commutator-free-4th-order") -> Su2:
    """Fixed-step propagation (order studies and cross-checks)."""
    if n_steps < 1:
        raise InvalidInputError("n_steps must be >= 1")
    e = np.linspace(t0, t1, n_steps + 1)
    q, _ = step_quaternions(m, e[:-1], np.diff(e), scheme)
    return Su2.from_array(_quat.reduce_product(q))


# --- Cayley-Klein route ------------------------------------------------------

def _xi_eta_rhs(m):
    def rhs(t, y):
        f = m.field(t)
        xi = complex(y[0], y[1])
        eta = complex(y[2], y[3])
        b = complex(f[0], -f[1]) * complex(math.cos(2 * y[4]), math.sin(2 * y[4]))
        # i xi' = -b eta, i eta' = -conj(b) xi
        dxi = 1j * b * eta
        deta = 1j * b.conjugate() * xi
        return [dxi.real, dxi.imag, deta.real, deta.imag, f[2]]

    return rhs


def _xi_eta_tolerances(cfg):
    rtol = max(cfg.rel_tol * 1e-2, 3e-14)
    atol = max(cfg.abs_tol * 1e-2, 1e-15)
    return rtol, atol


def propagate_xi_eta_trajectory(m: FieldModel, t0: float, t_grid,
                                cfg: IntegratorConfig = DEFAULT_CONFIG) -> list:
    """CayleyKlein values at each grid time, integrating the (xi, eta, beta) system with DOP853."""
    grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(np.diff(grid) < 0) or (len(grid) and grid[0] < t0):
        raise InvalidInputError("t_grid must be ascending and start at or after t0")
    if len(grid) == 0:
        return []
    if grid[-1] == t0:
        return [CayleyKlein(1.0 + 0j, 0j, 0.0) for _ in grid]
    rtol, atol = _xi_eta_tolerances(cfg)
    max_step = cfg.max_step if cfg.max_step is not None else (grid[-1] - t0) / 50.0
    sol = solve_ivp(
        _xi_eta_rhs(m), (float(t0), float(grid[-1])), [1.0, 0.0, 0.0, 0.0, 0.0],
        method="DOP853", rtol=rtol, atol=atol, t_eval=grid, max_step=max_step,
    )
    if sol.status != 0:
        raise NumericError("(xi, eta) integration failed", message=sol.message)
    out = []
    for k in range(len(grid)):
        y = sol.y[:, k]
        xi, eta = complex(y[0], y[1]), complex(y[2], y[3])
        n = math.sqrt(abs(xi) ** 2 + abs(eta) ** 2)
        out.append(CayleyKlein(xi / n, eta / n, float(y[4])))
    return out


def propagate_xi_eta(m: FieldModel, t0: float, t1: float,
                     cfg: IntegratorConfig = DEFAULT_CONFIG) -> CayleyKlein:
    """(xi, eta, beta) at ``t1``, driven by ``b = (B_x - i B_y) e^{2 i beta}``."""
    if t1 < t0:
        raise InvalidInputError("propagate_xi_eta integrates forward only")
    return propagate_xi_eta_trajectory(m, t0, [t1], cfg)[0]

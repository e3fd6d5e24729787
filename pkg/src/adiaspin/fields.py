"""Time-dependent magnetic fields with analytic derivatives.

Fields are in angular-frequency units: the magnetic moment is absorbed into
``B`` and hbar = 1, so ``i dpsi/dt = (B . sigma) psi``.  Every model
evaluates on scalar or array times; arrays of shape ``(n,)`` give field
arrays of shape ``(n, 3)``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, FieldRangeError, InvalidInputError

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class FieldSample:
    """Field value ``b`` and its time derivative ``db_dt`` at time(s) ``t``."""

    t: np.ndarray
    b: np.ndarray
    db_dt: np.ndarray


class FieldModel:
    """Base class; subclasses implement ``field``, ``rate`` and ``support``.

    ``curvature`` (the second derivative) defaults to central differences of
    ``rate`` and is overridden analytically by the built-in models.
    """

    #: time interval on which the model can be evaluated
    domain = (-math.inf, math.inf)

    def field(self, t):
        raise NotImplementedError

    def rate(self, t):
        raise NotImplementedError

    def curvature(self, t, h=1e-4):
        t = np.asarray(t, dtype=float)
        return (self.rate(t + h) - self.rate(t - h)) / (2 * h)

    def support(self) -> frozenset:
        """Axes (0, 1, 2) on which the field is not identically zero."""
        raise NotImplementedError

    def is_longitudinal(self) -> bool:
        """True when the transverse part vanishes identically."""
        return self.support() <= {2}

    def stationary_frame(self) -> bool:
        """True when ``|B|``, ``B_z`` and the azimuth rate are constant.

        Frame quantities (``nu``, ``gamma0``) are then exactly constant and
        consumers may use their values at one instant instead of
        re-evaluating them with rounding noise.
        """
        return False

    def sample(self, t) -> FieldSample:
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        return FieldSample(t=t, b=self.field(t), db_dt=self.rate(t))

    def _check_range(self, t):
        lo, hi = self.domain
        if np.any(t < lo) or np.any(t > hi) or not np.all(np.isfinite(t)):
            raise FieldRangeError(f"time outside the field domain [{lo}, {hi}]")

    def to_config(self) -> dict:
        raise NotImplementedError


def _vec3(t, x, y, z):
    if np.ndim(t) == 0 and np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(z) == 0:
        return np.array([x, y, z], dtype=float)
    t = np.asarray(t, dtype=float)
    return np.stack(np.broadcast_arrays(x, y, z, t)[:3], axis=-1).astype(float)


@dataclass(frozen=True)
class Constant(FieldModel):
    b: tuple

    def __post_init__(self):
        b = tuple(float(c) for c in self.b)
        if len(b) != 3 or not all(math.isfinite(c) for c in b):
            raise InvalidInputError("Constant field needs three finite components")
        object.__setattr__(self, "b", b)

    def field(self, t):
        return _vec3(t, *self.b)

    def rate(self, t):
        return _vec3(t, 0.0, 0.0, 0.0)

    def curvature(self, t, h=None):
        return _vec3(t, 0.0, 0.0, 0.0)

    def support(self):
        return frozenset(i for i, c in enumerate(self.b) if c != 0.0)

    def stationary_frame(self):
        return True

    def to_config(self):
        return {"type": "constant", "b": list(self.b)}


@dataclass(frozen=True)
class Rotating(FieldModel):
    """Field of fixed magnitude whose transverse part has azimuth ``big_phi0 + big_phi_dot * t``.

    Note the azimuth here is the full field azimuth; the half-angle
    ``phi`` used by the frame quantities is half of it.
    """

    bz: float
    bperp: float
    big_phi_dot: float
    big_phi0: float = 0.0

    def __post_init__(self):
        if self.bperp < 0:
            raise InvalidInputError("Rotating field requires bperp >= 0")

    def _azimuth(self, t):
        return self.big_phi0 + self.big_phi_dot * np.asarray(t, dtype=float)

    def field(self, t):
        a = self._azimuth(t)
        return _vec3(t, self.bperp * np.cos(a), self.bperp * np.sin(a), self.bz)

    def rate(self, t):
        a = self._azimuth(t)
        k = self.bperp * self.big_phi_dot
        return _vec3(t, -k * np.sin(a), k * np.cos(a), 0.0)

    def curvature(self, t, h=None):
        a = self._azimuth(t)
        k = -self.bperp * self.big_phi_dot**2
        return _vec3(t, k * np.cos(a), k * np.sin(a), 0.0)

    def stationary_frame(self):
        return True

    def support(self):
        s = {0, 1} if self.bperp != 0.0 else set()
        if self.bz != 0.0:
            s.add(2)
        return frozenset(s)

    def to_config(self):
        return {
            "type": "rotating",
            "bz": self.bz,
            "bperp": self.bperp,
            "big_phi_dot": self.big_phi_dot,
            "big_phi0": self.big_phi0,
        }


def _sech_tanh(s):
    # overflow-free sech and tanh
    e = np.exp(-2.0 * np.abs(s))
    sech = 2.0 * np.sqrt(e) / (1.0 + e)
    return sech, np.tanh(s)


IDENTITY_MAP = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


@dataclass(frozen=True)
class RosenZener(FieldModel):
    """Constant component ``beta0/T`` on x plus a ``zeta/(T cosh(t/T))`` pulse on y.

    ``axis_map`` is a signed permutation matrix applied to every sample, so
    ``axis_map="x->z"`` places the constant component on z.
    """

    beta0: float
    zeta: float
    t_cap: float = 1.0
    axis_map: tuple = IDENTITY_MAP

    def __post_init__(self):
        if not self.t_cap > 0:
            raise InvalidInputError("RosenZener requires T > 0")
        object.__setattr__(self, "axis_map", parse_axis_map(self.axis_map))

    def _raw(self, t, order):
        s = np.asarray(t, dtype=float) / self.t_cap
        sech, tanh = _sech_tanh(s)
        T = self.t_cap
        if order == 0:
            return _vec3(t, self.beta0 / T, self.zeta * sech / T, 0.0)
        if order == 1:
            return _vec3(t, 0.0, -self.zeta * sech * tanh / T**2, 0.0)
        return _vec3(t, 0.0, self.zeta * (sech * tanh**2 - sech**3) / T**3, 0.0)

    def _map(self, v):
        return v @ np.asarray(self.axis_map, dtype=float).T

    def field(self, t):
        return self._map(self._raw(t, 0))

    def rate(self, t):
        return self._map(self._raw(t, 1))

    def curvature(self, t, h=None):
        return self._map(self._raw(t, 2))

    def support(self):
        raw = {i for i, c in ((0, self.beta0), (1, self.zeta)) if c != 0.0}
        return _mapped_support(self.axis_map, raw)

    def to_config(self):
        cfg = {"type": "rosen_zener", "beta0": self.beta0, "zeta": self.zeta, "T": self.t_cap}
        if self.axis_map != IDENTITY_MAP:
            cfg["axis_map"] = format_axis_map(self.axis_map)
        return cfg


@dataclass(frozen=True, eq=False)
class Sampled(FieldModel):
    """Tabulated field, interpolated by a cubic spline per component.

    Derivatives are those of the spline itself, so ``db_dt`` is exactly the
    derivative of the interpolated ``b``.
    """

    times: tuple
    values: tuple
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or len(t) < 4:
            raise InvalidInputError("Sampled field needs at least 4 time points")
        if np.any(np.diff(t) <= 0):
            raise InvalidInputError("Sampled times must be strictly increasing")
        if v.shape != (len(t), 3) or not np.all(np.isfinite(v)):
            raise InvalidInputError("Sampled values must be finite with shape (n, 3)")
        object.__setattr__(self, "times", tuple(t.tolist()))
        object.__setattr__(self, "values", tuple(map(tuple, v.tolist())))
        object.__setattr__(self, "_spline", CubicSpline(t, v, axis=0))

    @property
    def domain(self):
        return (self.times[0], self.times[-1])

    def field(self, t):
        return self._spline(np.asarray(t, dtype=float))

    def rate(self, t):
        return self._spline(np.asarray(t, dtype=float), 1)

    def curvature(self, t, h=None):
        return self._spline(np.asarray(t, dtype=float), 2)

    def support(self):
        v = np.asarray(self.values)
        return frozenset(i for i in range(3) if np.any(v[:, i] != 0.0))

    def to_config(self):
        return {"type": "sampled", "times": list(self.times), "values": [list(r) for r in self.values]}


@dataclass(frozen=True)
class Sum(FieldModel):
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise InvalidInputError("Sum needs at least one child")
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def domain(self):
        lo = max(c.domain[0] for c in self.children)
        hi = min(c.domain[1] for c in self.children)
        return (lo, hi)

    def field(self, t):
        return sum(c.field(t) for c in self.children)

    def rate(self, t):
        return sum(c.rate(t) for c in self.children)

    def curvature(self, t, h=1e-4):
        return sum(c.curvature(t, h) for c in self.children)

    def support(self):
        return frozenset().union(*(c.support() for c in self.children))

    def to_config(self):
        return {"type": "sum", "children": [c.to_config() for c in self.children]}


@dataclass(frozen=True)
class Relabeled(FieldModel):
    """``child`` with every sample multiplied by the signed permutation ``axis_map``."""

    child: FieldModel
    axis_map: tuple

    def __post_init__(self):
        object.__setattr__(self, "axis_map", parse_axis_map(self.axis_map))

    @property
    def domain(self):
        return self.child.domain

    def _map(self, v):
        return v @ np.asarray(self.axis_map, dtype=float).T

    def field(self, t):
        return self._map(self.child.field(t))

    def rate(self, t):
        return self._map(self.child.rate(t))

    def curvature(self, t, h=1e-4):
        return self._map(self.child.curvature(t, h))

    def support(self):
        return _mapped_support(self.axis_map, self.child.support())

    def to_config(self):
        cfg = dict(self.child.to_config())
        inner = cfg.get("axis_map")
        m = self.axis_map
        if inner is not None:
            m = _matmul3(m, parse_axis_map(inner))
        if m == IDENTITY_MAP:
            cfg.pop("axis_map", None)
        else:
            cfg["axis_map"] = format_axis_map(m)
        return cfg


def _mapped_support(m, axes):
    out = set()
    for j in axes:
        for i in range(3):
            if m[i][j] != 0:
                out.add(i)
    return frozenset(out)


def _matmul3(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3))


def _det3(m):
    return int(round(np.linalg.det(np.asarray(m, dtype=float))))


_PAIR = re.compile(r"^\s*([xyz])\s*->\s*([+-]?)\s*([xyz])\s*$")


def parse_axis_map(spec) -> tuple:
    """Normalize an axis map to a proper signed permutation matrix.

    Accepts a 3x3 nested sequence or a string such as ``"x->z"`` or
    ``"x->z, y->y, z->-x"``.  A single pair ``a->b`` (``b != a``) is
    completed by the quarter turn about ``a x b``.  Two pairs fix the third
    by right-handedness.  Reflections are rejected.
    """
    if isinstance(spec, str):
        m = _parse_axis_string(spec)
    else:
        try:
            m = tuple(tuple(int(v) for v in row) for row in spec)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"invalid axis map {spec!r}") from exc
    if len(m) != 3 or any(len(r) != 3 for r in m):
        raise InvalidInputError("axis map must be 3x3")
    arr = np.asarray(m)
    if not (np.all(np.isin(arr, (-1, 0, 1))) and np.all(np.abs(arr).sum(0) == 1)
            and np.all(np.abs(arr).sum(1) == 1)):
        raise InvalidInputError(f"axis map {spec!r} is not a signed permutation")
    if _det3(m) != 1:
        raise InvalidInputError(f"axis map {spec!r} is a reflection, not a rotation")
    return m


def _parse_axis_string(spec):
    text = spec.strip().lower()
    if text in ("", "identity", "id"):
        return IDENTITY_MAP
    cols = {}
    for part in text.split(","):
        mt = _PAIR.match(part)
        if not mt:
            raise InvalidInputError(f"cannot parse axis map entry {part!r}")
        src, sign, dst = _AXES[mt.group(1)], -1 if mt.group(2) == "-" else 1, _AXES[mt.group(3)]
        if src in cols:
            raise InvalidInputError(f"axis {mt.group(1)} mapped twice")
        v = [0, 0, 0]
        v[dst] = sign
        cols[src] = v
    if len(cols) == 1:
        (src, v), = cols.items()
        dst = int(np.flatnonzero(v)[0])
        if dst == src:
            if v[dst] < 0:
                raise InvalidInputError("a single a->-a pair does not define a rotation")
            return IDENTITY_MAP
        # quarter turn about src x dst carrying src onto +-dst
        e_src = np.eye(3)[src]
        target = np.asarray(v, dtype=float)
        axis = np.cross(e_src, target)
        k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
        r = np.eye(3) + k + k @ k
        return tuple(tuple(int(round(c)) for c in row) for row in r)
    if len(cols) == 2:
        missing = ({0, 1, 2} - set(cols)).pop()
        a, b = sorted(cols)
        third = np.cross(cols[a], cols[b])
        cols[missing] = [int(c) for c in third]
        trial = np.zeros((3, 3), dtype=int)
        for src, v in cols.items():
            trial[:, src] = v
        if _det3(trial) < 0:
            cols[missing] = [-c for c in cols[missing]]
    m = np.zeros((3, 3), dtype=int)
    for src, v in cols.items():
        m[:, src] = v
    return tuple(tuple(int(c) for c in row) for row in m)


def format_axis_map(m) -> str:
    names = "xyz"
    parts = []
    for j in range(3):
        i = next(i for i in range(3) if m[i][j] != 0)
        parts.append(f"{names[j]}->{'-' if m[i][j] < 0 else ''}{names[i]}")
    return ",".join(parts)


def axis_map_matrix(m) -> np.ndarray:
    return np.asarray(parse_axis_map(m), dtype=float)


def relabel_axes(m: FieldModel, axis_map) -> FieldModel:
    """Model whose samples are ``axis_map @ B`` for the samples ``B`` of ``m``."""
    mat = parse_axis_map(axis_map)
    if mat == IDENTITY_MAP:
        return m
    if isinstance(m, RosenZener):
        return RosenZener(m.beta0, m.zeta, m.t_cap, _matmul3(mat, m.axis_map))
    if isinstance(m, Relabeled):
        combined = _matmul3(mat, m.axis_map)
        return m.child if combined == IDENTITY_MAP else Relabeled(m.child, combined)
    return Relabeled(m, mat)


def inverse_axis_map(axis_map) -> tuple:
    m = parse_axis_map(axis_map)
    return tuple(tuple(m[j][i] for j in range(3)) for i in range(3))


def derivative_check(m: FieldModel, t_grid, h: float) -> float:
    """Largest deviation between central differences of ``b`` and ``db_dt``."""
    if not h > 0:
        raise InvalidInputError("h must be positive")
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    fd = (m.field(t + h) - m.field(t - h)) / (2 * h)
    return float(np.max(np.abs(fd - m.rate(t))))


# --- JSON configuration -------------------------------------------------------

_KEYS = {
    "constant": ({"type", "b"}, set()),
    "rotating": ({"type", "bz", "bperp", "big_phi_dot"}, {"big_phi0"}),
    "rosen_zener": ({"type", "beta0", "zeta", "T"}, set()),
    "sampled": ({"type", "times", "values"}, {"interpolation"}),
    "sum": ({"type", "children"}, set()),
}


def _num(cfg, key):
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number")
    return float(v)


def field_from_config(cfg: dict) -> FieldModel:
    """Build a model from a field-config mapping; unknown keys are errors."""
    if not isinstance(cfg, dict):
        raise ConfigError("field config must be a JSON object")
    kind = cfg.get("type")
    if kind not in _KEYS:
        raise ConfigError(f"unknown field type {kind!r}")
    required, optional = _KEYS[kind]
    optional = optional | {"axis_map"}
    missing = required - cfg.keys()
    unknown = cfg.keys() - required - optional
    if missing:
        raise ConfigError(f"{kind}: missing keys {sorted(missing)}")
    if unknown:
        raise ConfigError(f"{kind}: unknown keys {sorted(unknown)}")
    try:
        if kind == "constant":
            model = Constant(tuple(cfg["b"]))
        elif kind == "rotating":
            model = Rotating(
                _num(cfg, "bz"), _num(cfg, "bperp"), _num(cfg, "big_phi_dot"),
                _num(cfg, "big_phi0") if "big_phi0" in cfg else 0.0,
            )
        elif kind == "rosen_zener":
            return RosenZener(
                _num(cfg, "beta0"), _num(cfg, "zeta"), _num(cfg, "T"),
                cfg.get("axis_map", IDENTITY_MAP),
            )
        elif kind == "sampled":
            if cfg.get("interpolation", "cubic") != "cubic":
                raise ConfigError("only cubic interpolation is supported")
            model = Sampled(tuple(cfg["times"]), tuple(map(tuple, cfg["values"])))
        else:
            if not isinstance(cfg["children"], list):
                raise ConfigError("sum: children must be a list")
            model = Sum(tuple(field_from_config(c) for c in cfg["children"]))
    except ConfigError:
        raise
    except (InvalidInputError, TypeError, ValueError) as exc:
        raise ConfigError(f"{kind}: {exc}") from exc
    if "axis_map" in cfg:
        try:
            model = relabel_axes(model, cfg["axis_map"])
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from exc
    return model


def load_field_config(path) -> FieldModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read field config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return field_from_config(cfg)

"""Scenario runners: the two exactness cases, the Rosen-Zener sweep and a claims report.

All runners are deterministic.  Sweep rows may be evaluated on several
threads (``ADIASPIN_THREADS``); they are always assembled in spec order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .adiabatic import propagate_adiabatic
from .errors import InvalidInputError, MisuseError
from .exact import IntegratorConfig, propagate
from .fields import Constant, FieldModel, Rotating, RosenZener, Sampled, axis_map_matrix, format_axis_map
from .observables import FlipConvention, compare
from .su2 import Su2, compose, fidelity_error, from_rotation_matrix

CONVENTIONS = ("lab-x", "relabeled-z", "field-direction")
CASE_I_LIMIT = 1e-10
CASE_II_LIMIT = 1e-8
ONE_PERCENT = 0.01
SLOPE_BETA0 = (5.0, 10.0, 20.0, 40.0)
SLOPE_TARGET = -2.0
SLOPE_WINDOW = 0.2
TREND_BETA0 = (1.5, 3.0, 10.0)
HORIZON_ABS = 1e-12
CLOSED_FORM_BETA0 = (1.5, 2.0, 3.0)
CLOSED_FORM_ZETA = (0.5, 1.5)
CLOSED_FORM_REL = 1e-6
HORIZON_REL = 1e-6


def thread_count() -> int:
    """Worker threads from ``ADIASPIN_THREADS`` (default 1)."""
    raw = os.environ.get("ADIASPIN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidInputError(f"ADIASPIN_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise InvalidInputError("ADIASPIN_THREADS must be >= 1")
    return n


def _ordered_map(fn, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# --- exactness cases ----------------------------------------------------------

@dataclass(frozen=True)
class CaseRow:
    label: str
    t0: float
    t1: float
    fidelity_error: float
    limit: float

    @property
    def passed(self) -> bool:
        return self.fidelity_error < self.limit


def run_case_i(m: FieldModel, t0: float, t: float, cfg: IntegratorConfig | None = None,
               label: str = "", quad_tol: float = 1e-12) -> CaseRow:
    """Exact oracle against the adiabatic propagator for a purely longitudinal field."""
    if not m.is_longitudinal():
        raise MisuseError("case (i) requires a field with identically zero transverse part")
    cfg = cfg or IntegratorConfig(1e-12, 1e-12)
    u = propagate(m, t0, t, cfg)
    a = propagate_adiabatic(m, t0, t, quad_tol=quad_tol)
    return CaseRow(label or type(m).__name__, float(t0), float(t), fidelity_error(u, a.u_lab), CASE_I_LIMIT)


def run_case_ii(bz: float, bperp: float, big_phi_dot: float, duration: float,
                cfg: IntegratorConfig | None = None, big_phi0: float = 0.0) -> CaseRow:
    """Exact oracle against the adiabatic propagator for a uniformly rotating field."""
    if not bperp > 0:
        raise InvalidInputError("case (ii) requires bperp > 0")
    cfg = cfg or IntegratorConfig(1e-11, 1e-11)
    m = Rotating(bz, bperp, big_phi_dot, big_phi0)
    u = propagate(m, 0.0, duration, cfg)
    a = propagate_adiabatic(m, 0.0, duration)
    label = f"bz={bz:g} bperp={bperp:g} phi_dot={big_phi_dot:g}"
    return CaseRow(label, 0.0, float(duration), fidelity_error(u, a.u_lab), CASE_II_LIMIT)


def case_ii_nu(bz: float, bperp: float, big_phi_dot: float) -> float:
    return math.hypot(0.5 * big_phi_dot - bz, bperp)


def default_case_i_fields():
    """Constant, sinusoidal and tabulated longitudinal profiles, each with its horizon."""
    ts = np.linspace(0.0, 10.0, 2001)
    sine = Sampled(ts, np.column_stack([0 * ts, 0 * ts, np.sin(ts)]))
    tk = np.linspace(0.0, 6.0, 13)
    bumps = 1.0 + 0.5 * np.cos(1.3 * tk) - 0.2 * tk
    tab = Sampled(tk, np.column_stack([0 * tk, 0 * tk, bumps]))
    return [("constant", Constant((0.0, 0.0, 2.0)), 0.0, 5.0),
            ("sinusoidal", sine, 0.0, 10.0),
            ("sampled", tab, 0.0, 6.0)]


DEFAULT_CASE_II = ((1.0, 1.0, 2.0), (1.0, 1.0, 200.0), (0.0, 1.0, 0.0), (1.0, 0.2, 3.0))


# --- Rosen-Zener sweep --------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Grid and numerical settings of a Rosen-Zener sweep.

    ``axis_map`` relabels the lab field for the adiabatic propagator and the
    ``relabeled-z`` convention; the default puts the constant component on z.
    """

    beta0_values: tuple = (1.5, 2.0, 3.0, 5.0, 10.0, 20.0)
    zeta_values: tuple = (1.0, 2.0, 3.0)
    t_cap: float = 1.0
    horizon_multiple: float = 20.0
    conventions: tuple = CONVENTIONS
    axis_map: str = "x->z"
    oracle_tol: float = 1e-12
    quad_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "beta0_values", tuple(float(v) for v in self.beta0_values))
        object.__setattr__(self, "zeta_values", tuple(float(v) for v in self.zeta_values))
        object.__setattr__(self, "conventions", tuple(self.conventions))
        if not self.horizon_multiple >= 10:
            raise InvalidInputError("horizon_multiple must be >= 10")
        if not self.beta0_values or not all(v > 0 for v in self.beta0_values):
            raise InvalidInputError("beta0 values must be positive")
        if not self.zeta_values or not all(v > 0 for v in self.zeta_values):
            raise InvalidInputError("zeta values must be positive")
        if not self.t_cap > 0:
            raise InvalidInputError("t_cap must be positive")
        unknown = set(self.conventions) - set(CONVENTIONS)
        if unknown or not self.conventions:
            raise InvalidInputError(f"conventions must be drawn from {CONVENTIONS}")
        object.__setattr__(self, "axis_map", format_axis_map(axis_map_matrix(self.axis_map)))
        IntegratorConfig(self.oracle_tol, self.oracle_tol)

    @property
    def oracle(self) -> IntegratorConfig:
        return IntegratorConfig(self.oracle_tol, self.oracle_tol)

    def as_dict(self) -> dict:
        return {
            "beta0_values": list(self.beta0_values), "zeta_values": list(self.zeta_values),
            "t_cap": self.t_cap, "horizon_multiple": self.horizon_multiple,
            "conventions": list(self.conventions),
            "axis_map": self.axis_map,
            "oracle_tol": self.oracle_tol, "quad_tol": self.quad_tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SweepSpec:
        known = {"beta0_values", "zeta_values", "t_cap", "horizon_multiple", "conventions",
                 "axis_map", "oracle_tol", "quad_tol"}
        extra = set(d) - known
        if extra:
            raise InvalidInputError(f"unknown sweep keys: {sorted(extra)}")
        return cls(**d)


ROW_FIELDS = ("beta0", "zeta", "convention", "w_exact", "w_adiabatic", "w_corrected",
              "w_rel_err", "w_rel_err_corrected", "both_negligible", "fidelity_error",
              "fidelity_error_corrected", "w_reference", "w_exact_2k", "horizon_converged",
              "w_closed_form")


@dataclass(frozen=True)
class SweepRow:
    beta0: float
    zeta: float
    convention: str
    w_exact: float
    w_adiabatic: float
    w_corrected: float
    w_rel_err: float
    w_rel_err_corrected: float
    both_negligible: bool
    fidelity_error: float
    fidelity_error_corrected: float
    w_reference: float
    w_exact_2k: float
    horizon_converged: bool
    #: asymptotic flip probability along the constant-field axis, see :func:`rz_flip_closed_form`
    w_closed_form: float


@dataclass(frozen=True)
class ScenarioReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, k)) for k in ROW_FIELDS])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def rz_flip_closed_form(beta0: float, zeta: float) -> float:
    """Asymptotic flip probability along the constant-field (x) axis.

    In the eigenbasis of ``sigma_x`` the field is a Rosen-Zener problem with
    detuning ``2 beta0 / T`` and pulse area ``2 pi zeta``, so
    ``W = sin^2(pi zeta) sech^2(pi beta0)``.  It vanishes for integer zeta.
    """
    return math.sin(math.pi * zeta) ** 2 / math.cosh(math.pi * beta0) ** 2


def _lift(axis_map) -> Su2:
    """SU(2) element conjugating lab propagators into the relabeled frame."""
    return from_rotation_matrix(axis_map_matrix(axis_map))


def _conj(g: Su2, u: Su2) -> Su2:
    return compose(compose(g, u), g.conjugate())


def _horizon_converged(w1: float, w2: float) -> bool:
    d = abs(w2 - w1)
    return d < HORIZON_ABS or d < HORIZON_REL * max(abs(w1), abs(w2))


def _exact_pair(spec: SweepSpec, beta0: float, zeta: float, k: float):
    """Lab and relabeled-frame oracle propagators over ``[-kT, kT]``."""
    lab = RosenZener(beta0, zeta, spec.t_cap)
    rel = RosenZener(beta0, zeta, spec.t_cap, spec.axis_map)
    t = k * spec.t_cap
    return propagate(lab, -t, t, spec.oracle), propagate(rel, -t, t, spec.oracle)


def _w_by_convention(spec, beta0, zeta, k, u_lab, u_rel, conv_name):
    if conv_name == "relabeled-z":
        return compare(u_rel, u_rel, FlipConvention((0.0, 0.0, 1.0))).w_exact
    return compare(u_lab, u_lab, _lab_convention(spec, beta0, zeta, k, conv_name)).w_exact


def _lab_convention(spec, beta0, zeta, k, conv_name) -> FlipConvention:
    if conv_name == "lab-x":
        return FlipConvention((1.0, 0.0, 0.0))
    b = RosenZener(beta0, zeta, spec.t_cap).field(k * spec.t_cap)
    return FlipConvention(tuple(b / np.linalg.norm(b)))


def _rz_rows(spec: SweepSpec, beta0: float, zeta: float) -> list:
    k = spec.horizon_multiple
    t = k * spec.t_cap
    u_lab, u_rel = _exact_pair(spec, beta0, zeta, k)
    u_lab2, u_rel2 = _exact_pair(spec, beta0, zeta, 2 * k)
    rel = RosenZener(beta0, zeta, spec.t_cap, spec.axis_map)
    a_rel = propagate_adiabatic(rel, -t, t, spec.quad_tol).u_lab
    c_rel = propagate_adiabatic(rel, -t, t, spec.quad_tol, correction="linearized").u_lab
    g = _lift(spec.axis_map)
    a_lab, c_lab = _conj(g.conjugate(), a_rel), _conj(g.conjugate(), c_rel)
    rows = []
    for name in spec.conventions:
        if name == "relabeled-z":
            conv = FlipConvention((0.0, 0.0, 1.0))
            ca, cc = compare(u_rel, a_rel, conv), compare(u_rel, c_rel, conv)
        else:
            conv = _lab_convention(spec, beta0, zeta, k, name)
            ca, cc = compare(u_lab, a_lab, conv), compare(u_lab, c_lab, conv)
        w2 = _w_by_convention(spec, beta0, zeta, 2 * k, u_lab2, u_rel2, name)
        rows.append(SweepRow(
            beta0, zeta, name, ca.w_exact, ca.w_approx, cc.w_approx, ca.w_rel_err, cc.w_rel_err,
            ca.both_negligible, ca.fidelity_error, cc.fidelity_error, zeta**4 / beta0**2,
            w2, _horizon_converged(ca.w_exact, w2), rz_flip_closed_form(beta0, zeta),
        ))
    return rows


def run_rosen_zener(spec: SweepSpec = SweepSpec()) -> ScenarioReport:
    """Exact, adiabatic and corrected flip probabilities over the sweep grid at ``t = -t0 = kT``."""
    pairs = [(b, z) for b in spec.beta0_values for z in spec.zeta_values]
    chunks = _ordered_map(lambda p: _rz_rows(spec, *p), pairs)
    rows = [r for c in chunks for r in c]
    meta = {
        "spec": spec.as_dict(),
        "oracle": {"scheme": spec.oracle.scheme, "rel_tol": spec.oracle_tol, "abs_tol": spec.oracle_tol},
        "gauge": "phi(t0) = 0 in the relabeled frame",
        "measurement": "t = -t0 = k T",
        "horizon_check": {"doubled_k": 2 * spec.horizon_multiple, "abs": HORIZON_ABS, "rel": HORIZON_REL,
                          "non_converged_rows": sum(not r.horizon_converged for r in rows)},
    }
    return ScenarioReport(rows, meta)


def write_csv(report: ScenarioReport, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv())


# --- claims -------------------------------------------------------------------

def _slope(xs, ys):
    lx, ly = np.log(np.asarray(xs)), np.log(np.asarray(ys))
    return float(np.polyfit(lx, ly, 1)[0])


def _scaling_claim(spec: SweepSpec, conv: str) -> dict:
    """Least-squares slope of log W against log beta0 at zeta = 1."""
    sub = SweepSpec(SLOPE_BETA0, (1.0,), spec.t_cap, spec.horizon_multiple, (conv,),
                    spec.axis_map, spec.oracle_tol, spec.quad_tol)
    ws = []
    for b in SLOPE_BETA0:
        u_lab, u_rel = _exact_pair(sub, b, 1.0, sub.horizon_multiple)
        ws.append(_w_by_convention(sub, b, 1.0, sub.horizon_multiple, u_lab, u_rel, conv))
    ratios = [w * b**2 for w, b in zip(ws, SLOPE_BETA0)]
    measurable = all(w > 0 for w in ws)
    slope = _slope(SLOPE_BETA0, ws) if measurable else None
    ok = (measurable and abs(slope - SLOPE_TARGET) <= SLOPE_WINDOW
          and abs(ratios[-1] - 1.0) < 0.1
          and all(abs(r2 - 1) <= abs(r1 - 1) for r1, r2 in zip(ratios, ratios[1:])))
    return {
        "status": "PASS" if ok else "NOT-REPRODUCED",
        # below this the horizon check cannot separate the asymptote from the finite-time tail
        "w_below_horizon_resolution": bool(max(ws) < HORIZON_ABS),
        "beta0": list(SLOPE_BETA0), "w_exact": ws, "w_times_beta0_sq": ratios,
        "fitted_slope": slope, "target_slope": SLOPE_TARGET, "slope_window": SLOPE_WINDOW,
    }


def claims_report(spec: SweepSpec = SweepSpec(), sweep: ScenarioReport | None = None) -> dict:
    """Evaluate each claim and record the measured numbers; never raises on a failed claim."""
    case_i = [run_case_i(m, a, b, label=name) for name, m, a, b in default_case_i_fields()]
    case_ii = []
    for bz, bp, pd in DEFAULT_CASE_II:
        nu = case_ii_nu(bz, bp, pd)
        for dur in (1.0 / nu, 1e3 / nu):
            case_ii.append(run_case_ii(bz, bp, pd, dur))
    sweep = sweep or run_rosen_zener(spec)

    def case_entry(rows):
        return {"status": "PASS" if all(r.passed for r in rows) else "FAIL",
                "rows": [{"label": r.label, "duration": r.t1 - r.t0, "fidelity_error": r.fidelity_error,
                          "limit": r.limit} for r in rows]}

    paper_grid = [r for r in sweep.rows if r.beta0 >= 1.5 and r.zeta >= 1]
    per_conv = {}
    for conv in spec.conventions:
        rows = [r for r in paper_grid if r.convention == conv]
        worst = max(rows, key=lambda r: r.w_rel_err)
        per_conv[conv] = {
            "one_percent": {
                "status": "PASS" if all(r.w_rel_err <= ONE_PERCENT for r in rows) else "NOT-REPRODUCED",
                "max_w_rel_err": worst.w_rel_err,
                "at": {"beta0": worst.beta0, "zeta": worst.zeta},
                "rows_within": sum(r.w_rel_err <= ONE_PERCENT for r in rows),
                "rows": len(rows),
                "both_negligible_rows": sum(r.both_negligible for r in rows),
            },
            "scaling": _scaling_claim(spec, conv),
        }

    closed_form = _closed_form_probe(spec)

    trend_rows = {}
    for b in TREND_BETA0:
        t = spec.horizon_multiple * spec.t_cap
        rel = RosenZener(b, 1.0, spec.t_cap, spec.axis_map)
        trend_rows[b] = fidelity_error(propagate(rel, -t, t, spec.oracle),
                                       propagate_adiabatic(rel, -t, t, spec.quad_tol).u_lab)
    vals = [trend_rows[b] for b in TREND_BETA0]
    return {
        "case_i_exactness": case_entry(case_i),
        "case_ii_exactness": case_entry(case_ii),
        "rosen_zener": per_conv,
        "fidelity_trend": {
            "status": "PASS" if all(b < a for a, b in zip(vals, vals[1:])) else "FAIL",
            "beta0": list(TREND_BETA0), "fidelity_error": vals,
        },
        "closed_form": closed_form,
        "horizon": sweep.metadata.get("horizon_check"),
        "spec": spec.as_dict(),
    }


def _closed_form_probe(spec: SweepSpec) -> dict:
    """Exact oracle against the closed form at non-integer zeta, plus its size on the sweep grid.

    The closed form is asymptotic, so the oracle value at the doubled
    horizon is compared; there the sech tail of the pulse is negligible.
    """
    probe = SweepSpec(CLOSED_FORM_BETA0, CLOSED_FORM_ZETA, spec.t_cap, spec.horizon_multiple, ("lab-x",),
                      spec.axis_map, spec.oracle_tol, spec.quad_tol)
    rows = run_rosen_zener(probe).rows
    rel = [abs(r.w_exact_2k - r.w_closed_form) / r.w_closed_form for r in rows]
    on_grid = [rz_flip_closed_form(b, z) for b in spec.beta0_values for z in spec.zeta_values]
    return {
        "status": "PASS" if max(rel) < CLOSED_FORM_REL else "FAIL",
        "formula": "sin^2(pi zeta) sech^2(pi beta0)",
        "convention": "lab-x",
        "oracle_horizon_multiple": 2 * probe.horizon_multiple,
        "max_rel_err_exact": max(rel),
        "limit": CLOSED_FORM_REL,
        "rows": [{"beta0": r.beta0, "zeta": r.zeta, "w_closed_form": r.w_closed_form,
                  "w_exact_2k": r.w_exact_2k, "w_exact": r.w_exact, "w_adiabatic": r.w_adiabatic,
                  "w_corrected": r.w_corrected, "w_rel_err": r.w_rel_err,
                  "w_rel_err_corrected": r.w_rel_err_corrected} for r in rows],
        "max_w_closed_form_on_sweep_grid": max(on_grid),
    }


def claims_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o).__name__}")

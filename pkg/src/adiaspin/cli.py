"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
Floats are written with 17 significant digits so every value round-trips.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .adiabatic import propagate_adiabatic_trajectory
from .angles import integrate_angles
from .errors import DegenerateFieldError, InvalidInputError, NumericError
from .exact import DEFAULT_CONFIG, SCHEMES, IntegratorConfig, propagate_trajectory
from .experiments import ScenarioReport, SweepSpec, claims_json, claims_report, run_rosen_zener
from .fields import load_field_config
from .frame import beta_integral, frame_states
from .observables import FlipConvention, bloch_vector, compare
from .oscillator import TRACE_HEADER, build_trace, trace_rows
from .su2 import Spinor, apply

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

FRAME_HEADER = ("beta_rad", "phi_rad", "phi_dot_rad_per_t", "b_perp_rad_per_t", "b_z_rad_per_t",
                "nu_rad_per_t", "gamma0_rad", "re_omega_rad_per_t", "im_omega_rad_per_t",
                "re_Omega_sq_rad2_per_t2", "im_Omega_sq_rad2_per_t2")
ANGLE_HEADER = ("t", "alpha_rad", "gamma_rad", "delta_rad", "alpha1_rad", "gamma0_rad", "nu_rad_per_t")


class _UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        return None if not math.isfinite(v) else float(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    return v


def _table(header, rows, fmt: str) -> str:
    if fmt == "json":
        doc = {"columns": list(header), "rows": [[_json_value(v) for v in r] for r in rows]}
        return json.dumps(doc, indent=1) + "\n"
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _UsageError(f"cannot write {out}: {exc}") from exc


def _config(args) -> IntegratorConfig:
    return IntegratorConfig(args.rel_tol, args.abs_tol, args.max_step, args.scheme)


def _grid(args) -> np.ndarray:
    if not args.t1 > args.t0:
        raise _UsageError("--t1 must be greater than --t0")
    if args.n < 2:
        raise _UsageError("--n must be at least 2")
    return np.linspace(args.t0, args.t1, args.n)


def _parse_vector(text: str, n: int, kind=float):
    try:
        parts = [kind(p.replace(" ", "")) for p in text.split(",")]
    except ValueError as exc:
        raise _UsageError(f"cannot parse {text!r}") from exc
    if len(parts) != n:
        raise _UsageError(f"expected {n} comma-separated values, got {text!r}")
    return parts


def _frame_rows(m, t0, grid, tol):
    try:
        states = frame_states(m, t0, grid, tol)
    except DegenerateFieldError:
        # frame quantities are undefined without a transverse field; keep beta
        nan = float("nan")
        rows, beta, prev = [], 0.0, t0
        for t in grid:
            beta += beta_integral(m, prev, float(t), tol)
            prev = float(t)
            bz = float(m.field(float(t))[2])
            rows.append([beta, nan, nan, 0.0, bz, nan, nan, nan, nan, nan, nan])
        return rows
    return [[s.beta, s.phi, s.phi_dot, s.b_perp, s.b_z, s.nu, s.gamma0,
             s.omega.real, s.omega.imag, s.omega_sq_cap.real, s.omega_sq_cap.imag] for s in states]


def cmd_simulate(args) -> str:
    m = load_field_config(args.field)
    grid = _grid(args)
    us = propagate_trajectory(m, args.t0, grid, _config(args))
    header = ["t", "q_w", "q_x", "q_y", "q_z"]
    spinor = None
    if args.spinor:
        up, down = _parse_vector(args.spinor, 2, complex)
        spinor = Spinor.normalized(up, down)
        header += ["bloch_x", "bloch_y", "bloch_z"]
    header += list(FRAME_HEADER)
    frames = _frame_rows(m, args.t0, grid, args.quad_tol)
    rows = []
    for t, u, fr in zip(grid, us, frames):
        row = [float(t), u.w, u.x, u.y, u.z]
        if spinor is not None:
            row += [float(c) for c in bloch_vector(apply(u, spinor))]
        rows.append(row + fr)
    return _table(header, rows, args.format)


def cmd_compare(args) -> str:
    m = load_field_config(args.field)
    grid = _grid(args)
    conv = FlipConvention(tuple(_parse_vector(args.axis, 3)))
    us = propagate_trajectory(m, args.t0, grid, _config(args))
    plain = propagate_adiabatic_trajectory(m, args.t0, grid, args.quad_tol)
    corr = propagate_adiabatic_trajectory(m, args.t0, grid, args.quad_tol, correction="linearized")
    header = ("t", "fidelity_error_adiabatic", "fidelity_error_corrected",
              "w_exact", "w_adiabatic", "w_corrected", "w_rel_err_adiabatic", "w_rel_err_corrected")
    rows = []
    for t, u, a, c in zip(grid, us, plain, corr):
        ca, cc = compare(u, a.u_lab, conv), compare(u, c.u_lab, conv)
        rows.append([float(t), ca.fidelity_error, cc.fidelity_error, ca.w_exact, ca.w_approx,
                     cc.w_approx, ca.w_rel_err, cc.w_rel_err])
    return _table(header, rows, args.format)


def cmd_angles(args) -> str:
    m = load_field_config(args.field)
    grid = _grid(args)
    tr = integrate_angles(m, args.t0, args.t1, _config(args), t_grid=grid)
    rows = [[float(t), a.alpha, a.gamma, a.delta, a.alpha1, float(g0), float(nu)]
            for t, a, g0, nu in zip(tr.grid, tr.angles, tr.gamma0, tr.nu)]
    return _table(ANGLE_HEADER, rows, args.format)


def cmd_oscillator(args) -> str:
    m = load_field_config(args.field)
    if not args.t1 > args.t0:
        raise _UsageError("--t1 must be greater than --t0")
    tr = build_trace(m, args.t0, args.t1, args.n, _config(args))
    return _table(TRACE_HEADER, trace_rows(tr).tolist(), args.format)


def _sweep_spec(args) -> SweepSpec:
    if not args.spec:
        return SweepSpec()
    try:
        with open(args.spec, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _UsageError(f"cannot read sweep spec {args.spec}: {exc}") from exc
    if not isinstance(data, dict):
        raise _UsageError("sweep spec must be a JSON object")
    return SweepSpec.from_dict(data)


def cmd_rz_sweep(args) -> str:
    report: ScenarioReport = run_rosen_zener(_sweep_spec(args))
    if args.format == "json":
        rows = [[_json_value(getattr(r, k)) for k in r.__dataclass_fields__] for r in report.rows]
        cols = list(report.rows[0].__dataclass_fields__) if report.rows else []
        return json.dumps({"columns": cols, "rows": rows, "metadata": report.metadata}, indent=1) + "\n"
    return report.to_csv()


def cmd_claims(args) -> str:
    return claims_json(claims_report(_sweep_spec(args)))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adiaspin", description="Spin-1/2 propagators in time-dependent fields.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True, n_default=101):
        sp.add_argument("--field", required=True, help="field-config JSON file")
        sp.add_argument("--t0", type=float, required=True)
        sp.add_argument("--t1", type=float, required=True)
        if grid:
            sp.add_argument("--n", type=int, default=n_default, help="number of grid points")
        sp.add_argument("--rel-tol", type=float, default=DEFAULT_CONFIG.rel_tol)
        sp.add_argument("--abs-tol", type=float, default=DEFAULT_CONFIG.abs_tol)
        sp.add_argument("--max-step", type=float, default=None)
        sp.add_argument("--scheme", choices=SCHEMES, default=DEFAULT_CONFIG.scheme)
        sp.add_argument("--quad-tol", type=float, default=1e-10)

    def output(sp, formats=("csv", "json")):
        sp.add_argument("--out", default="-", help="output path ('-' for stdout)")
        sp.add_argument("--format", choices=formats, default=formats[0])

    s = sub.add_parser("simulate", help="exact propagator and frame quantities on a grid")
    common(s)
    s.add_argument("--spinor", help="initial spinor 'up,down' (complex values allowed, e.g. '1,1j')")
    output(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compare", help="exact against adiabatic and corrected propagators")
    common(s)
    s.add_argument("--axis", default="0,0,1", help="polarization axis for W, 'x,y,z'")
    output(s)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("angles", help="integrate the exact angle equations")
    common(s)
    output(s)
    s.set_defaults(func=cmd_angles)

    s = sub.add_parser("oscillator", help="complex-frequency oscillator trace and residual")
    common(s, n_default=4096)
    output(s)
    s.set_defaults(func=cmd_oscillator)

    s = sub.add_parser("rz-sweep", help="Rosen-Zener sweep report")
    s.add_argument("--spec", help="sweep spec JSON (defaults if omitted)")
    output(s)
    s.set_defaults(func=cmd_rz_sweep)

    s = sub.add_parser("claims", help="claims report as JSON")
    s.add_argument("--spec", help="sweep spec JSON (defaults if omitted)")
    output(s, formats=("json",))
    s.set_defaults(func=cmd_claims)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        _write(args.func(args), args.out)
    except (_UsageError, InvalidInputError) as exc:
        print(f"adiaspin: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, ArithmeticError) as exc:
        print(f"adiaspin: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

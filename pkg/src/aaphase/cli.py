"""``aa-phase`` command line: evolve, phase, scan, verify.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 integration failure, 4 constraint mismatch (including no-solution and
non-cyclic states).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance
from .config import ConfigError, RunConfig, evaluate, read_config, resolve
from .errors import (
    ConstraintMismatchError,
    DegenerateNullspaceError,
    IntegrationError,
    NoSolutionError,
    NotCyclicError,
)
from .model import ModelParams, polar_decomposition, rabi
from .phases import (
    aa_phase_numeric,
    case_generic_T,
    case_half_integer_m,
    case_integer_n,
    commensurate_coupling,
    commensurate_record,
    detect_cyclic,
    mean_energy,
    overlap,
    phase_distance,
    rabi_cycle_n1,
    rabi_cycle_special,
    wrap,
)
from .model import eigenbasis
from .propagator import InitialState, closed_trajectory, evolve_numeric_many
from .regimes import (
    RegimeQuery,
    coupling_for_half_integer,
    coupling_for_integer,
    coupling_for_rabi_period,
    resonant_omega,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_CONSTRAINT = 0, 1, 2, 3, 4

EVOLVE_COLUMNS = ["t", "re_c1", "im_c1", "re_c2", "im_c2", "pop1", "pop2", "mean_energy"]
PHASE_KEYS = ["branch", "tau", "phi", "dyn", "beta", "fidelity_defect", "cross_check_deviation",
              "gamma_aux", "gamma_over_omega", "eps1", "eps2", "d0", "omega", "phi0",
              "re_c1", "im_c1", "re_c2", "im_c2"]
SCAN_COLUMNS = ["index", "axis_value", "eps1", "eps2", "d0", "omega", "gamma_over_omega", "theta",
                "branch", "status", "beta_1", "beta_2", "beta_plus"]
SCAN_STATES = (InitialState(1, 0), InitialState(0, 1), InitialState.normalized(1, 1))
PHASE_BRANCHES = ("integer-n", "half-integer-m", "generic-T", "commensurate", "rabi-n1",
                  "rabi-gamma0", "rabi-gamma-omega", "numeric")
SCAN_BRANCHES = ("auto", "integer-n", "half-integer-m", "rabi-n1")
ORDER_MATCH_TOL = 1e-10


# --- output ------------------------------------------------------------------


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def write_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def table_json(columns, rows) -> str:
    return write_json({"columns": list(columns), "rows": [[_json_value(v) for v in r] for r in rows]})


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- evolve ------------------------------------------------------------------


def cmd_evolve(cfg: RunConfig, args) -> int:
    p = cfg.params
    if p is None:
        raise ConfigError("evolve needs an explicit d0")
    t_start = cfg.number("t_start", 0.0)
    t_stop = cfg.number("t_stop", 5 * p.period)
    n_points = cfg.integer("n_points", 101)
    if n_points < 2:
        raise ConfigError(f"{cfg.where('n_points')}: n_points must be >= 2")
    if not t_stop > t_start or t_start < 0:
        raise ConfigError(f"{cfg.where('t_stop')}: need 0 <= t_start < t_stop, got [{t_start}, {t_stop}]")
    ts = np.linspace(t_start, t_stop, n_points)
    c = closed_trajectory(p, cfg.state, ts)
    energy = mean_energy(p, cfg.state, ts)
    columns = list(EVOLVE_COLUMNS)
    extra = None
    if args.oracle:
        tol = args.tol if args.tol is not None else cfg.number("tol", 1e-10)
        numeric = evolve_numeric_many(p, cfg.state.bare(p), ts, tol=tol)
        closed_bare = np.einsum("tij,tj->ti", eigenbasis(p, ts), c)
        extra = np.abs(numeric - closed_bare).max(axis=1)
        columns.append("oracle_dev")
    rows = []
    for i, t in enumerate(ts):
        c1, c2 = c[i]
        row = [t, c1.real, c1.imag, c2.real, c2.imag, abs(c1) ** 2, abs(c2) ** 2, energy[i]]
        if extra is not None:
            row.append(extra[i])
        rows.append(row)
    emit(write_csv(columns, rows) if cfg.fmt == "csv" else table_json(columns, rows), args.out)
    return EXIT_OK


# --- phase -------------------------------------------------------------------


def _order(cfg: RunConfig, default=None) -> float:
    return cfg.number("order", default)


def _auto_d0(cfg: RunConfig, branch: str) -> float:
    try:
        return _solve_d0(cfg, branch)
    except NoSolutionError as exc:
        # smallest reachable ratio is at D0 = 0
        floor = abs(cfg.delta_eps + cfg.omega) / (2 * cfg.omega)
        raise NoSolutionError(f"{exc}; Gamma/omega >= {floor:.15g} for any D0", exc.d0_squared) from None


def _solve_d0(cfg: RunConfig, branch: str) -> float:
    de, w = cfg.delta_eps, cfg.omega
    if branch == "integer-n":
        return coupling_for_integer(RegimeQuery.from_omega(de, w, _order(cfg)))
    if branch == "half-integer-m":
        return coupling_for_half_integer(RegimeQuery.from_omega(de, w, _order(cfg)))
    if branch == "rabi-n1":
        return coupling_for_rabi_period(RegimeQuery.from_omega(de, w, 1))
    if branch == "commensurate":
        probe = ModelParams(cfg.eps1, cfg.eps2, 0.0, w, cfg.phi0)
        return commensurate_coupling(probe, cfg.integer("m"), cfg.integer("n"))
    raise ConfigError(f"branch {branch} needs an explicit d0")


def phase_record(cfg: RunConfig, branch: str, cyc_tol: float):
    """Run one branch; returns (record, fidelity_defect, cross_check_deviation)."""
    if cfg.d0 is None:
        cfg.with_d0(_auto_d0(cfg, branch))
    p = cfg.params
    s0 = cfg.state
    if branch == "integer-n":
        rec = case_integer_n(p, cfg.integer("order"), s0)
    elif branch == "half-integer-m":
        rec = case_half_integer_m(p, _order(cfg), s0)
    elif branch == "rabi-n1":
        rec = rabi_cycle_n1(p, s0)
    elif branch == "commensurate":
        rec = commensurate_record(p, cfg.integer("m"), cfg.integer("n"), s0)
    elif branch == "generic-T":
        sign = cfg.integer("sign", 1)
        if sign not in (1, -1):
            raise ConfigError(f"{cfg.where('sign')}: sign must be +1 or -1")
        _, rec = case_generic_T(p, sign)
    elif branch in ("rabi-gamma0", "rabi-gamma-omega"):
        _, rec = rabi_cycle_special(p, branch)
    else:
        tau = cfg.number("tau", p.period)
        if not tau > 0:
            raise ConfigError(f"{cfg.where('tau')}: tau must be positive")
        rec = aa_phase_numeric(p, s0, tau, cyc_tol)
        psi = evolve_numeric_many(p, s0.bare(p), [0.0, tau], tol=1e-10)
        ode_phi = float(np.angle(np.vdot(psi[0], psi[1])))
        return rec, 1.0 - abs(overlap(p, s0, tau)), phase_distance(rec.phi, ode_phi)
    sol = detect_cyclic(p, rec.s0, rec.tau, cyc_tol)
    if sol is None:
        defect = 1.0 - abs(overlap(p, rec.s0, rec.tau))
        raise NotCyclicError(f"state not cyclic at tau = {rec.tau:.17g}", defect)
    numeric = aa_phase_numeric(p, rec.s0, rec.tau, cyc_tol)
    return rec, sol.fidelity_defect, phase_distance(rec.beta, numeric.beta)


def cmd_phase(cfg: RunConfig, args) -> int:
    branch = cfg.text("branch", "numeric")
    if branch not in PHASE_BRANCHES:
        raise ConfigError(f"{cfg.where('branch')}: branch must be one of {', '.join(PHASE_BRANCHES)}")
    cyc_tol = args.tol if args.tol is not None else 1e-9
    rec, defect, cross = phase_record(cfg, branch, cyc_tol)
    p = cfg.params
    report = {
        "branch": rec.branch.value,
        "tau": rec.tau,
        "phi": rec.phi,
        "dyn": rec.dyn,
        "beta": rec.beta,
        "fidelity_defect": max(defect, 0.0),
        "cross_check_deviation": cross,
        "gamma_aux": rec.gamma_aux,
        "gamma_over_omega": rabi(p).gamma / p.omega,
        "eps1": p.eps1, "eps2": p.eps2, "d0": p.d0, "omega": p.omega, "phi0": p.phi0,
        "re_c1": rec.s0.c1_0.real, "im_c1": rec.s0.c1_0.imag,
        "re_c2": rec.s0.c2_0.real, "im_c2": rec.s0.c2_0.imag,
    }
    assert list(report) == PHASE_KEYS
    if cfg.fmt == "json":
        text = write_json({k: _json_value(v) for k, v in report.items()})
    else:
        text = write_csv(PHASE_KEYS, [[report[k] for k in PHASE_KEYS]])
    emit(text, args.out)
    if args.out:
        unit, scale = ("deg", 180 / math.pi) if args.degrees else ("rad", 1.0)
        print(f"{report['branch']}: tau={rec.tau:.10g} phi={wrap(rec.phi) * scale:.10g} {unit} "
              f"beta={wrap(rec.beta) * scale:.10g} {unit} (cross-check {cross:.2e})")
    return EXIT_OK


# --- scan --------------------------------------------------------------------


def _classify(p: ModelParams) -> tuple[str, float | None]:
    ratio = rabi(p).gamma / p.omega
    k = round(2 * ratio)
    if k >= 1 and abs(ratio - k / 2) <= ORDER_MATCH_TOL:
        return ("integer-n", k // 2) if k % 2 == 0 else ("half-integer-m", k / 2)
    return "none", None


def _scan_point(p: ModelParams, branch: str, order):
    """Principal AA phases of the fixed state family; failures become a status string."""
    if branch == "auto":
        branch, order = _classify(p)
        if branch == "none":
            return branch, "not-cyclic", [math.nan] * 3
    try:
        if branch == "integer-n":
            betas = [case_integer_n(p, int(order), s).beta for s in SCAN_STATES]
        elif branch == "half-integer-m":
            betas = [case_half_integer_m(p, order, s).beta for s in SCAN_STATES]
        else:
            betas = [rabi_cycle_n1(p, s).beta for s in SCAN_STATES]
    except ConstraintMismatchError:
        return branch, "constraint-mismatch", [math.nan] * 3
    return branch, "ok", [wrap(b) for b in betas]


def _threads() -> int:
    env = os.environ.get("AA_PHASE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"AA_PHASE_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


def cmd_scan(cfg: RunConfig, args) -> int:
    axis = cfg.text("axis", "omega")
    if axis not in ("omega", "d0", "order-n"):
        raise ConfigError(f"{cfg.where('axis')}: axis must be omega, d0 or order-n")
    branch = cfg.text("branch", "auto" if axis != "order-n" else "integer-n")
    if branch not in SCAN_BRANCHES:
        raise ConfigError(f"{cfg.where('branch')}: scan branch must be one of {', '.join(SCAN_BRANCHES)}")
    if "values" in cfg.raw.entries:
        try:
            values = [evaluate(v) for v in cfg.text("values").replace(",", " ").split()]
        except ValueError as exc:
            raise ConfigError(f"{cfg.where('values')}: {exc}") from None
    else:
        steps = cfg.integer("steps", 11)
        if steps < 0:
            raise ConfigError(f"{cfg.where('steps')}: steps must be >= 0")
        start, stop = cfg.number("start"), cfg.number("stop")
        if stop < start:
            raise ConfigError(f"{cfg.where('stop')}: stop must be >= start")
        values = list(np.linspace(start, stop, steps)) if steps else []
    if axis == "order-n":
        if any(v != int(v) or v < 1 for v in values):
            raise ConfigError(f"{cfg.where('values' if 'values' in cfg.raw.entries else 'start')}: "
                              "order-n values must be positive integers")
        if cfg.d0 is None:
            raise ConfigError("order-n scan needs an explicit d0")
    elif axis == "omega" and any(v <= 0 for v in values):
        raise ConfigError(f"{cfg.where('start')}: omega values must be positive")
    elif axis == "d0" and any(v < 0 for v in values):
        raise ConfigError(f"{cfg.where('start')}: d0 values must be non-negative")
    if axis != "d0" and cfg.d0 is None:
        raise ConfigError("scan needs an explicit d0 unless sweeping d0")
    order = cfg.number("order", 1.0) if branch in ("integer-n", "half-integer-m") and axis != "order-n" else None

    def point(item):
        i, v = item
        if axis == "omega":
            p = ModelParams(cfg.eps1, cfg.eps2, cfg.d0, v, cfg.phi0)
            b, o = branch, order
        elif axis == "d0":
            p = ModelParams(cfg.eps1, cfg.eps2, v, cfg.omega, cfg.phi0)
            b, o = branch, order
        else:
            w = resonant_omega(cfg.delta_eps, cfg.d0, int(v))
            p = ModelParams(cfg.eps1, cfg.eps2, cfg.d0, w, cfg.phi0)
            b, o = "integer-n", int(v)
        b, status, betas = _scan_point(p, b, o)
        return [i, v, p.eps1, p.eps2, p.d0, p.omega, rabi(p).gamma / p.omega,
                polar_decomposition(p).theta, b, status, *betas]

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(point, enumerate(values)))
    emit(write_csv(SCAN_COLUMNS, rows) if cfg.fmt == "csv" else table_json(SCAN_COLUMNS, rows), args.out)
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(cfg: RunConfig, args) -> int:
    seed = cfg.integer("seed", acceptance.DEFAULT_SEED)
    shift = cfg.number("perturb_d0", 0.0)
    results = acceptance.run_all(seed=seed, d0_shift=shift)
    ok = all(r.passed for r in results)
    if args.json:
        text = write_json({"passed": ok, "seed": seed, "perturb_d0": shift,
                           "criteria": [_jsonable(r.as_dict()) for r in results]})
        emit(text, args.out)
    else:
        lines = [acceptance.format_line(r) for r in results]
        lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
        emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_VERIFY


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    return _json_value(obj)


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aa-phase",
        description="Dynamics and Aharonov-Anandan phases of the RWA two-level model.")
    parser.add_argument("command", choices=["evolve", "phase", "scan", "verify"])
    parser.add_argument("overrides", nargs="*", metavar="KEY=VALUE",
                        help="configuration overrides, applied after --config")
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], help="output format for data files")
    parser.add_argument("--oracle", action="store_true", help="evolve: add the RK4 deviation column")
    parser.add_argument("--tol", type=float,
                        help="evolve: integrator tolerance; phase: cyclicity tolerance")
    parser.add_argument("--json", action="store_true", help="verify: machine-readable summary")
    parser.add_argument("--degrees", action="store_true", help="show angles in degrees (display only)")
    return parser


COMMANDS = {"evolve": cmd_evolve, "phase": cmd_phase, "scan": cmd_scan, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        raw = read_config(args.config, args.overrides)
        if args.out is None and "out" in raw.entries:
            args.out = raw.entries["out"][0]
        cfg = resolve(raw, args.format)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"aa-phase: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"aa-phase: integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (ConstraintMismatchError, NoSolutionError, NotCyclicError, DegenerateNullspaceError) as exc:
        ratio = getattr(exc, "ratio", None)
        extra = f" (Gamma/omega = {ratio:.15g})" if ratio is not None and "Gamma/omega" not in str(exc) else ""
        print(f"aa-phase: constraint mismatch: {exc}{extra}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except ValueError as exc:
        print(f"aa-phase: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

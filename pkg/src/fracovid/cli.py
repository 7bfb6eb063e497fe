"""
Command-line entry point: ``fracovid {simulate,fit,sensitivity,control,report}``.

Exit codes: 0 success, 1 numerical failure (divergence, non-convergence),
2 configuration error, 3 data or I/O error.  Log verbosity comes from the
``FRACOVID_LOG_LEVEL`` environment variable.
"""

from __future__ import annotations

import argparse
import glob
import logging
import os
import re
import sys

import numpy as np

from . import costeff
from .config import RunConfig, default_config_path, load_config
from .control import ADJOINT_NAMES, ControlSchedule, forward_backward_sweep
from .errors import (AlignmentError, ConfigError, DataError, FracovidError, NumericalError,
                     ValidationError)
from .fitting import fit, load_case_data, write_overlay
from .model import COMPARTMENTS, basic_reproduction_number, uncontrolled_field
from .sensitivity import alpha_sensitivity_curve, sensitivity_vs_alpha
from .solver import TimeGrid, Trajectory, check_order, pece_solve

log = logging.getLogger("fracovid")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3


def _alpha_tag(a):
    return f"{a:g}"


def _write_summary(path, items):
    with open(path, "w") as fh:
        for k, v in items:
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = f"{v:.10g}"
            elif isinstance(v, str):
                v = f'"{v}"'
            fh.write(f"{k} = {v}\n")


def _alphas(args, default):
    if args.alpha is None:
        return default
    try:
        return [check_order(float(a)) for a in args.alpha.split(",") if a.strip()]
    except (ValueError, ValidationError) as exc:
        raise ConfigError(str(exc), key="--alpha") from None


def cmd_simulate(cfg: RunConfig, args, out):
    for a in _alphas(args, [cfg.alpha]):
        traj = pece_solve(uncontrolled_field(cfg.params, a, cfg.schedule, cfg.variant),
                          cfg.initial_state, a, cfg.grid, COMPARTMENTS)
        tag = _alpha_tag(a)
        traj.to_csv(os.path.join(out, f"trajectory_alpha{tag}.csv"))
        total = traj.values.sum(axis=1)
        _write_summary(os.path.join(out, f"simulate_alpha{tag}.txt"), [
            ("alpha", a),
            ("r0", basic_reproduction_number(cfg.params, a)),
            ("population", float(cfg.params.N)),
            ("initial_total", float(total[0])),
            ("max_drift_from_initial_total", float(np.max(np.abs(total - total[0])))),
            ("max_deviation_from_population", float(np.max(np.abs(total - cfg.params.N)))),
            ("min_compartment", float(traj.values.min())),
        ])
        log.info("simulate alpha=%s written", tag)


def cmd_fit(cfg: RunConfig, args, out):
    path = args.data or cfg.data_path
    data = load_case_data(path)
    fc = cfg.fit_config()
    classical = fit(data, fc, fixed_alpha=1.0)
    best = fit(data, fc)
    rows = [("classical", classical), ("fractional", best)]
    with open(os.path.join(out, "fit_report.txt"), "w") as fh:
        fh.write(f'data = "{os.path.basename(path)}"\n')
        fh.write(f'window = "{fc.start.isoformat()}..{fc.end.isoformat()}"\n')
        fh.write(f"data_norm = {best.data_norm:.10g}\n")
        fh.write('scaling = "observable = (I + P + H) / s"\n')
        for name, r in rows:
            fh.write(f"\n[{name}]\n")
            fh.write(f"alpha = {r.alpha:.6g}\ns = {r.s:.6g}\n")
            fh.write(f"absolute_error = {r.absolute_error:.10g}\n")
            fh.write(f"relative_error = {r.relative_error:.10g}\n")
            fh.write(f"converged = {str(r.converged).lower()}\n")
    for name, r in rows:
        write_overlay(os.path.join(out, f"fit_overlay_{name}.csv"), data, fc, r)
    if not (best.converged and classical.converged):
        return EXIT_NUMERICAL
    return EXIT_OK


_PLOT_SCRIPT = """\
# gnuplot script: sensitivity indices against the derivative order
set datafile separator ','
set key autotitle columnhead
set xlabel 'alpha'
set ylabel 'sensitivity index'
plot {plots}
"""


def cmd_sensitivity(cfg: RunConfig, args, out):
    alphas = _alphas(args, cfg.sensitivity_alphas)
    files = []
    for p in cfg.sensitivity_parameters:
        files.append(sensitivity_vs_alpha(p, cfg.params, alphas).to_csv(out))
    files.append(alpha_sensitivity_curve(cfg.params, alphas).to_csv(out))
    if args.plot_script:
        plots = ", ".join(f"'{os.path.basename(f)}' using 1:2 with linespoints" for f in files)
        with open(os.path.join(out, "sensitivity.gp"), "w") as fh:
            fh.write(_PLOT_SCRIPT.format(plots=plots))


def _scenario(args):
    if args.only_v and args.only_m:
        raise ConfigError("--only-v and --only-m are mutually exclusive", key="--only-v")
    if args.only_v:
        return "only-v", dict(use_v=True, use_m=False)
    if args.only_m:
        return "only-m", dict(use_v=False, use_m=True)
    return "both", dict(use_v=True, use_m=True)


def _control_csv(path, res):
    names = COMPARTMENTS + ADJOINT_NAMES + ("v", "m")
    values = np.column_stack([res.state.values, res.adjoint.values, res.controls.v, res.controls.m])
    Trajectory(res.state.grid, values, names).to_csv(path, fmt="%.12g")


def cmd_control(cfg: RunConfig, args, out):
    name, switches = _scenario(args)
    sweep = cfg.sweep_config(**switches)
    weights = cfg.weights()
    status = EXIT_OK
    for a in _alphas(args, cfg.control_alphas):
        tag = _alpha_tag(a)
        res = forward_backward_sweep(cfg.params, a, cfg.initial_state, weights, cfg.grid, sweep)
        stem = os.path.join(out, f"control_{name}_alpha{tag}")
        _control_csv(stem + ".csv", res)
        with open(stem + "_iterations.csv", "w") as fh:
            fh.write("iteration,residual\n")
            fh.writelines(f"{k},{r:.6e}\n" for k, r in enumerate(res.history, start=1))
        _write_summary(stem + "_summary.txt", [
            ("alpha", a), ("scenario", name), ("J", res.J), ("iterations", res.iterations),
            ("converged", res.converged), ("residual", res.residual),
            ("v_max", sweep.v_max), ("m_max", sweep.m_max),
        ])
        base = pece_solve(uncontrolled_field(cfg.params, a, None, cfg.variant), cfg.initial_state,
                          a, cfg.grid, COMPARTMENTS)
        base.to_csv(os.path.join(out, f"uncontrolled_alpha{tag}.csv"))
        if not res.converged:
            print(f"alpha={tag}: sweep did not converge, final residual {res.residual:.3e}",
                  file=sys.stderr)
            status = EXIT_NUMERICAL
    return status


def _read_control(path):
    try:
        t = Trajectory.from_csv(path)
    except (OSError, ValueError, IndexError) as exc:
        raise DataError(f"cannot read control artifact {path}: {exc}") from None
    need = COMPARTMENTS + ("v", "m")
    if any(n not in t.names for n in need):
        raise DataError(f"{path} lacks columns {need}")
    state = Trajectory(t.grid, np.column_stack([t[c] for c in COMPARTMENTS]), COMPARTMENTS)
    return state, ControlSchedule(t.grid, t["v"], t["m"])


def cmd_report(cfg: RunConfig, args, out):
    src = args.runs or out
    name = "both"
    if args.only_v or args.only_m:
        name = _scenario(args)[0]
    paths = sorted(glob.glob(os.path.join(src, f"control_{name}_alpha*.csv")))
    paths = [p for p in paths if re.search(r"alpha[0-9.e+-]+\.csv$", p)]
    if not paths:
        raise DataError(f"no control artifacts control_{name}_alpha*.csv in {src}")
    C1, C2 = cfg.cost_coefficients
    reports, grid = [], None
    for p in paths:
        alpha = float(re.search(r"alpha([0-9.e+-]+)\.csv$", p).group(1))
        state, controls = _read_control(p)
        if grid is None:
            grid = state.grid
        elif state.grid != grid:
            raise AlignmentError(f"{os.path.basename(p)} uses a different time grid")
        reports.append(costeff.effectiveness_report(alpha, state, controls, C1, C2, cfg.report_scale))
    reports.sort(key=lambda r: r.alpha)
    costeff.write_table(reports, os.path.join(out, f"cost_effectiveness_{name}.csv"), cfg.params.N)
    with open(os.path.join(out, f"cost_effectiveness_{name}.txt"), "w") as fh:
        fh.write(f"# units: AV and TC in individual-days divided by report_scale = {cfg.report_scale:g}\n")
        fh.write(f"# C1 = {C1:g}, C2 = {C2:g}\n")
        fh.write(f"{'alpha':>6} {'AV':>14} {'TC':>14} {'ACER':>10} {'F_bar':>8}\n")
        for r in reports:
            acer = "undefined (AV = 0)" if np.isnan(r.ACER) else f"{r.ACER:10.6f}"
            fh.write(f"{r.alpha:6g} {r.AV_scaled:14.2f} {r.TC_scaled:14.2f} {acer:>10} {r.F_bar:8.5f}\n")


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "sensitivity": cmd_sensitivity,
    "control": cmd_control,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fracovid", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="TOML run config (default: shipped third-wave config)")
        p.add_argument("--out", default=None, help="output directory (default: config output_dir)")
        p.add_argument("--alpha", default=None, help="comma-separated derivative orders")
        if name == "fit":
            p.add_argument("--data", default=None, help="case CSV overriding data.path")
        if name == "sensitivity":
            p.add_argument("--plot-script", action="store_true", help="also write a gnuplot script")
        if name in ("control", "report"):
            p.add_argument("--only-v", action="store_true", help="vaccination only (m = 0)")
            p.add_argument("--only-m", action="store_true", help="preventive measures only (v = 0)")
        if name == "report":
            p.add_argument("--runs", default=None, help="directory holding control artifacts")
    return parser


def main(argv=None):
    level = os.environ.get("FRACOVID_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config or default_config_path())
        out = args.out or cfg.output_dir
        try:
            os.makedirs(out, exist_ok=True)
        except OSError as exc:
            raise DataError(f"cannot create output directory {out}: {exc}") from None
        status = COMMANDS[args.command](cfg, args, out)
        return status or EXIT_OK
    except (DataError, AlignmentError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FracovidError as exc:  # pragma: no cover
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

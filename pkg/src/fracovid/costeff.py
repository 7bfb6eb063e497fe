"""
Cost-effectiveness summaries of an optimally controlled run.

With i(t) = I(t) + P(t) and i0 = i(0):

    efficacy        E_f(t) = 1 - i*(t) / i0
    averted cases   AV     = tf * i0 - int_0^tf i*(t) dt
    effectiveness   F      = AV / (i0 * tf)
    total cost      TC     = int_0^tf (C1 v* S* + C2 m* i*) dt
    ACER                   = TC / AV

All integrals use the trapezoidal rule on the solver grid.  AV and TC are
in individual-days; ``report_scale`` divides both for display (ACER and F
are unchanged by it).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .control import ControlSchedule
from .errors import AlignmentError, SingularityError, ValidationError
from .solver import Trajectory

__all__ = [
    "EffectivenessReport",
    "infectious",
    "efficacy",
    "averted_cases",
    "effectiveness",
    "total_cost",
    "acer",
    "effectiveness_report",
    "write_table",
]


def infectious(traj: Trajectory) -> np.ndarray:
    """i(t) = I(t) + P(t)."""
    return traj.values[:, 2] + traj.values[:, 3]


def _i0(traj, i0):
    i0 = float(infectious(traj)[0]) if i0 is None else float(i0)
    if i0 <= 0:
        raise ValidationError("efficacy is undefined for i(0) = 0")
    return i0


def efficacy(traj: Trajectory, i0=None) -> np.ndarray:
    return 1.0 - infectious(traj) / _i0(traj, i0)


def averted_cases(traj: Trajectory, i0=None, tf=None) -> float:
    i0 = _i0(traj, i0)
    tf = traj.grid.tf - traj.grid.t0 if tf is None else tf
    return float(tf * i0 - trapezoid(infectious(traj), dx=traj.grid.h))


def effectiveness(traj: Trajectory, i0=None, tf=None) -> float:
    i0 = _i0(traj, i0)
    tf = traj.grid.tf - traj.grid.t0 if tf is None else tf
    return averted_cases(traj, i0, tf) / (i0 * tf)


def total_cost(traj: Trajectory, controls: ControlSchedule, C1=1.0, C2=1.0) -> float:
    if traj.grid != controls.grid:
        raise AlignmentError("state and control grids differ")
    S = traj.values[:, 0]
    integrand = C1 * controls.v * S + C2 * controls.m * infectious(traj)
    return float(trapezoid(integrand, dx=traj.grid.h))


def acer(TC, AV) -> float:
    if AV == 0:
        raise SingularityError("ACER undefined: no cases averted (AV = 0)")
    return TC / AV


@dataclass
class EffectivenessReport:
    alpha: float
    AV: float
    TC: float
    ACER: float
    F_bar: float
    efficacy_curve: np.ndarray
    report_scale: float = 1.0

    @property
    def AV_scaled(self):
        return self.AV / self.report_scale

    @property
    def TC_scaled(self):
        return self.TC / self.report_scale


def effectiveness_report(alpha, traj: Trajectory, controls: ControlSchedule, C1=1.0, C2=1.0,
                         report_scale=1.0) -> EffectivenessReport:
    AV = averted_cases(traj)
    TC = total_cost(traj, controls, C1, C2)
    try:
        ratio = acer(TC, AV)
    except SingularityError:
        ratio = float("nan")
    return EffectivenessReport(float(alpha), AV, TC, ratio, effectiveness(traj), efficacy(traj),
                               float(report_scale))


def write_table(reports, path, population=None):
    """Write one row per report: alpha, AV, TC, ACER, F_bar (+ scaled and per-capita columns)."""
    header = ["alpha", "AV", "TC", "ACER", "F_bar", "report_scale", "AV_scaled", "TC_scaled"]
    if population:
        header += ["AV_per_capita", "TC_per_capita"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in reports:
            row = [r.alpha, r.AV, r.TC, r.ACER, r.F_bar, r.report_scale, r.AV_scaled, r.TC_scaled]
            if population:
                row += [r.AV / population, r.TC / population]
            w.writerow([f"{x:.10g}" for x in row])

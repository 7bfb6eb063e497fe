"""
Fit the derivative order and a reporting scale factor to daily case data.

The observable compared with data is (I + P + H) / s sampled at whole days:
the scale factor s maps the modelled pool of active infections onto the
daily confirmed-case counts.  Data are smoothed with a five-day trailing
mean before comparison, and the mismatch is the (uniformly weighted) l2
norm over the fit window.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import DataError, DataValidationError, GapError, IntegrationDiverged, ParseError
from .model import (COMPARTMENTS, ContactReductionSchedule, ModelParams,
                    portugal_initial_conditions, uncontrolled_field)
from .solver import TimeGrid, Trajectory, check_order, pece_solve

log = logging.getLogger(__name__)

__all__ = [
    "CaseSeries",
    "FitConfig",
    "FitResult",
    "trailing_mean",
    "load_case_data",
    "simulate_window",
    "predicted_observable",
    "fit_objective",
    "fit",
    "write_overlay",
]

SMOOTHING_WINDOW = 5
THIRD_WAVE_START = dt.date(2020, 12, 27)
THIRD_WAVE_END = dt.date(2021, 2, 16)


def trailing_mean(x, window=SMOOTHING_WINDOW) -> np.ndarray:
    """Mean of the current and previous ``window - 1`` values; shorter history at the start."""
    x = np.asarray(x, dtype=float)
    c = np.concatenate(([0.0], np.cumsum(x)))
    k = np.arange(1, len(x) + 1)
    lo = np.maximum(k - window, 0)
    return (c[k] - c[lo]) / (k - lo)


@dataclass
class CaseSeries:
    dates: list
    daily_cases: np.ndarray
    smoothed: np.ndarray = None

    def __post_init__(self):
        self.daily_cases = np.asarray(self.daily_cases, dtype=float)
        if len(self.dates) != len(self.daily_cases):
            raise DataValidationError("dates and counts differ in length")
        if np.any(self.daily_cases < 0):
            raise DataValidationError("case counts must be non-negative")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur != prev + dt.timedelta(days=1):
                if cur <= prev:
                    raise DataValidationError(f"dates not strictly increasing at {cur}")
                raise GapError(prev + dt.timedelta(days=1))
        if self.smoothed is None:
            self.smoothed = trailing_mean(self.daily_cases)

    def __len__(self):
        return len(self.dates)

    def window(self, start, end):
        """Indices [i, j) of the dates inside the closed interval [start, end]."""
        if not self.dates or start > end:
            raise DataValidationError("empty fit window")
        if start < self.dates[0] or end > self.dates[-1]:
            raise DataValidationError(
                f"fit window {start}..{end} outside data range {self.dates[0]}..{self.dates[-1]}"
            )
        i = (start - self.dates[0]).days
        return i, i + (end - start).days + 1

    @classmethod
    def from_smoothed(cls, start: dt.date, smoothed, window=SMOOTHING_WINDOW) -> "CaseSeries":
        """
        Daily counts whose trailing mean reproduces ``smoothed`` exactly.

        Used to manufacture synthetic data from a model curve.
        """
        target = np.asarray(smoothed, dtype=float)
        daily = np.empty_like(target)
        for k in range(len(target)):
            lo = max(0, k - window + 1)
            daily[k] = target[k] * (k - lo + 1) - daily[lo:k].sum()
        dates = [start + dt.timedelta(days=i) for i in range(len(target))]
        return cls(dates, daily)


def load_case_data(path) -> CaseSeries:
    """Read ``date,confirmed_daily`` CSV with ISO-8601 dates, one row per day."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read case data {path}: {exc}") from exc
    dates, counts = [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["date", "confirmed_daily"]:
            raise ParseError(1, "expected header 'date,confirmed_daily'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(lineno, f"expected 2 fields, got {len(row)}")
            try:
                d = dt.date.fromisoformat(row[0].strip())
                n = float(row[1])
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from exc
            if not math.isfinite(n):
                raise ParseError(lineno, "non-finite count")
            if n < 0:
                raise DataValidationError(f"line {lineno}: negative case count {n}")
            dates.append(d)
            counts.append(n)
    return CaseSeries(dates, counts)


@dataclass(frozen=True)
class FitConfig:
    params: ModelParams = ModelParams()
    schedule: ContactReductionSchedule = field(default_factory=ContactReductionSchedule.zero)
    start: dt.date = THIRD_WAVE_START
    end: dt.date = THIRD_WAVE_END
    h: float = 0.1
    initial_state: tuple = None
    alpha0: float = 1.0
    s0: float = 20.0
    restart_alphas: tuple = (1.0, 0.99, 0.95, 0.9)
    max_iter: int = 400
    alpha_min: float = 0.05
    variant: str = "corrected"

    @property
    def n_days(self):
        return (self.end - self.start).days + 1

    def y0(self):
        if self.initial_state is not None:
            return np.asarray(self.initial_state, dtype=float)
        return portugal_initial_conditions(self.params.N).as_array()


@dataclass
class FitResult:
    alpha: float
    s: float
    absolute_error: float
    relative_error: float
    converged: bool = True
    evaluations: int = 0
    model: np.ndarray = None
    data_norm: float = None


def simulate_window(alpha, config: FitConfig) -> Trajectory:
    """Forward solve over the fit window, day 0 = ``config.start``."""
    grid = TimeGrid(0.0, float(config.n_days - 1), config.h)
    f = uncontrolled_field(config.params, alpha, config.schedule, config.variant)
    return pece_solve(f, config.y0(), alpha, grid, COMPARTMENTS)


def predicted_observable(traj: Trajectory, s) -> np.ndarray:
    """(I + P + H) / s at whole days, read from the nearest grid node."""
    days = np.arange(math.floor(traj.grid.tf - traj.grid.t0 + 1e-9) + 1)
    idx = [traj.grid.index(traj.grid.t0 + d) for d in days]
    v = traj.values[idx]
    return (v[:, 2] + v[:, 3] + v[:, 5]) / s


def _target(data: CaseSeries, config: FitConfig):
    i, j = data.window(config.start, config.end)
    return data.smoothed[i:j]


class _Objective:
    """l2 mismatch with the trajectory for each alpha cached (it does not depend on s)."""

    def __init__(self, data, config):
        self.config = config
        self.target = _target(data, config)
        self.norm = float(np.linalg.norm(self.target))
        if self.norm == 0:
            raise DataValidationError("smoothed data are identically zero in the fit window")
        self._pool = lru_cache(maxsize=64)(self._pool_for)
        self.evaluations = 0

    def _pool_for(self, alpha):
        return predicted_observable(simulate_window(alpha, self.config), 1.0)

    def errors(self, alpha, s):
        self.evaluations += 1
        model = self._pool(float(alpha)) / s
        err = float(np.linalg.norm(model - self.target))
        return err, err / self.norm, model

    def __call__(self, x):
        alpha, s = x
        if not (0 < alpha <= 1) or s <= 0:
            return np.inf
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                return self.errors(alpha, s)[0]
        except IntegrationDiverged:
            # a trial point the integrator cannot follow is simply a bad point
            log.debug("trajectory diverged at alpha=%g", alpha)
            return np.inf


def fit_objective(alpha, s, data: CaseSeries, config: FitConfig = FitConfig()):
    """Absolute and relative l2 error of the model observable at (alpha, s)."""
    alpha = check_order(alpha)
    if not (s > 0):
        raise DataValidationError("scale factor s must be positive")
    err, rel, _ = _Objective(data, config).errors(alpha, s)
    return err, rel


def fit(data: CaseSeries, config: FitConfig = FitConfig(), fixed_alpha=None) -> FitResult:
    """
    Minimise the l2 mismatch over (alpha, s) with Nelder-Mead.

    The simplex search is restarted from each alpha in
    ``config.restart_alphas`` (plus ``config.alpha0``) and the best point is
    returned.  With ``fixed_alpha`` only s is optimised.
    """
    obj = _Objective(data, config)
    # fatol is absolute in scipy; tie it to the data scale
    best = None

    if fixed_alpha is not None:
        alpha = check_order(fixed_alpha)
        runs = [(alpha, minimize(lambda x: obj((alpha, x[0])), [config.s0], method="Nelder-Mead",
                                 bounds=[(1e-9, None)],
                                 options=dict(xatol=1e-8, fatol=1e-10 * obj.norm,
                                              maxiter=config.max_iter)))]
        runs = [(alpha, r.x[0], r.fun, r.success) for _, r in runs]
    else:
        starts = dict.fromkeys((config.alpha0,) + tuple(config.restart_alphas))
        runs = []
        for a0 in starts:
            r = minimize(obj, [a0, config.s0], method="Nelder-Mead",
                         bounds=[(config.alpha_min, 1.0), (1e-9, None)],
                         options=dict(xatol=1e-7, fatol=1e-9 * obj.norm, maxiter=config.max_iter,
                                      initial_simplex=[[a0, config.s0],
                                                       [a0 - 0.02, config.s0],
                                                       [a0, config.s0 * 1.1]]))
            log.debug("restart alpha0=%g -> alpha=%.5f s=%.4f err=%.6g", a0, r.x[0], r.x[1], r.fun)
            runs.append((r.x[0], r.x[1], r.fun, r.success))

    for alpha, s, err, ok in runs:
        if best is None or err < best[2]:
            best = (alpha, s, err, ok)
    alpha, s, _, ok = best
    err, rel, model = obj.errors(alpha, s)
    if not ok:
        log.warning("Nelder-Mead hit its iteration cap; returning best point found")
    return FitResult(float(alpha), float(s), err, rel, bool(ok), obj.evaluations, model, obj.norm)


def write_overlay(path, data: CaseSeries, config: FitConfig, result: FitResult):
    i, j = data.window(config.start, config.end)
    model = result.model
    if model is None:
        model = predicted_observable(simulate_window(result.alpha, config), result.s)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("date", "data", "smoothed", "model"))
        for k in range(j - i):
            w.writerow((data.dates[i + k].isoformat(), f"{data.daily_cases[i + k]:.6g}",
                        f"{data.smoothed[i + k]:.10g}", f"{model[k]:.10g}"))

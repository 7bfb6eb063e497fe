"""
Caputo fractional initial value problems on uniform grids.

The integrator is the fractional Adams-Bashforth-Moulton method in PECE
form (one predictor, one corrector pass per step) with the full memory of
the convolution kept.  For 0 < alpha <= 1 the problem

    D^alpha y(t) = f(t, y),   y(t0) = y0

is equivalent to the Volterra equation

    y(t) = y0 + 1/Gamma(alpha) * int_t0^t (t - s)^(alpha - 1) f(s, y(s)) ds,

and the scheme discretises that integral with product rectangle (predictor)
and product trapezoid (corrector) rules.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationDiverged, NoConvergence, ValidationError

__all__ = [
    "TimeGrid",
    "Trajectory",
    "check_order",
    "pece_solve",
    "pece_solve_reversed",
    "mittag_leffler",
]

RHS = Callable[[float, np.ndarray], np.ndarray]


def check_order(alpha):
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0) or math.isnan(alpha):
        raise ValidationError(f"derivative order must satisfy 0 < alpha <= 1, got {alpha}")
    return alpha


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t0, t0 + h, ..., tf with ``n_steps`` intervals."""

    t0: float
    tf: float
    h: float = 0.1

    def __post_init__(self):
        if not (self.tf > self.t0):
            raise ValidationError(f"grid needs tf > t0, got t0={self.t0}, tf={self.tf}")
        if not (self.h > 0):
            raise ValidationError(f"grid step must be positive, got {self.h}")
        n = round((self.tf - self.t0) / self.h)
        if n < 1:
            raise ValidationError("grid step larger than the interval")
        if abs(n * self.h - (self.tf - self.t0)) > 1e-9 * max(1.0, abs(self.tf - self.t0)):
            raise ValidationError(
                f"step {self.h} does not divide [{self.t0}, {self.tf}] into whole steps"
            )

    @property
    def n_steps(self) -> int:
        return round((self.tf - self.t0) / self.h)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.n_steps + 1)

    def index(self, t, *, strict=True) -> int:
        """Index of the grid node nearest to ``t``."""
        k = int(round((t - self.t0) / self.h))
        if strict and not (0 <= k <= self.n_steps):
            raise ValidationError(f"time {t} outside grid [{self.t0}, {self.tf}]")
        return min(max(k, 0), self.n_steps)


@dataclass
class Trajectory:
    """State samples on a grid; ``values[k]`` is the state at ``grid.times[k]``."""

    grid: TimeGrid
    values: np.ndarray
    names: tuple = field(default=())

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape[0] != self.grid.n_steps + 1:
            raise ValidationError(
                f"trajectory has {self.values.shape[0]} rows, grid needs {self.grid.n_steps + 1}"
            )
        if not self.names:
            self.names = tuple(f"y{i}" for i in range(self.values.shape[1]))

    @property
    def t(self) -> np.ndarray:
        return self.grid.times

    def __getitem__(self, name) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def at(self, t) -> np.ndarray:
        return self.values[self.grid.index(t)]

    def to_csv(self, path, fmt="%.10g"):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t",) + tuple(self.names))
            for tk, row in zip(self.t, self.values):
                w.writerow([fmt % tk] + [fmt % x for x in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        t = body[:, 0]
        grid = TimeGrid(float(t[0]), float(t[-1]), float(round((t[-1] - t[0]) / (len(t) - 1), 12)))
        return cls(grid, body[:, 1:], tuple(header[1:]))


def _weights(alpha, n):
    k = np.arange(n + 2, dtype=float)
    # predictor: b_k = (k+1)^a - k^a, k = n - j
    b = k[1:] ** alpha - k[:-1] ** alpha
    # corrector interior: a_k = (k+2)^(a+1) + k^(a+1) - 2 (k+1)^(a+1), k = n - j
    p = np.arange(n + 3, dtype=float) ** (alpha + 1)
    a = p[2:] + p[:-2] - 2.0 * p[1:-1]
    return b, a


def pece_solve(rhs: RHS, y0, order, grid: TimeGrid, names: Sequence[str] = ()) -> Trajectory:
    """
    Solve the left-Caputo IVP ``D^order y = rhs(t, y)``, ``y(grid.t0) = y0``.

    Full-memory fractional Adams-Bashforth-Moulton PECE.  ``rhs`` is only
    ever evaluated at grid nodes.  Raises :class:`IntegrationDiverged` with
    the failing step when a non-finite value appears.
    """
    alpha = check_order(order)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if not np.all(np.isfinite(y0)):
        raise ValidationError("initial state must be finite")
    n_steps, h = grid.n_steps, grid.h
    t = grid.times
    d = y0.size

    b, a = _weights(alpha, n_steps)
    c_pred = h**alpha / math.gamma(alpha + 1)
    c_corr = h**alpha / math.gamma(alpha + 2)

    y = np.empty((n_steps + 1, d))
    f = np.empty((n_steps + 1, d))
    y[0] = y0
    f[0] = rhs(t[0], y0)
    if not np.all(np.isfinite(f[0])):
        raise IntegrationDiverged(0)

    for n in range(n_steps):
        # nodes j = 0..n, weight index k = n - j
        pred = y0 + c_pred * (b[n::-1] @ f[: n + 1])
        fp = rhs(t[n + 1], pred)
        a0 = n ** (alpha + 1) - (n - alpha) * (n + 1) ** alpha
        hist = a0 * f[0]
        if n > 0:
            hist = hist + a[n - 1 :: -1] @ f[1 : n + 1]
        y[n + 1] = y0 + c_corr * (fp + hist)
        f[n + 1] = rhs(t[n + 1], y[n + 1])
        if not (np.all(np.isfinite(y[n + 1])) and np.all(np.isfinite(f[n + 1]))):
            raise IntegrationDiverged(n + 1)

    return Trajectory(grid, y, tuple(names))


def pece_solve_reversed(rhs: RHS, terminal_value, order, grid: TimeGrid, names=()) -> Trajectory:
    """
    Solve a terminal-value problem through the substitution t' = tf - t.

    ``rhs(t_prime, y)`` is the vector field of the left-Caputo problem in
    reversed time; it is integrated forward from ``terminal_value`` at
    t' = 0 and the result is re-indexed to the original grid, so the last
    row equals ``terminal_value``.
    """
    reversed_grid = TimeGrid(0.0, grid.tf - grid.t0, grid.h)
    sol = pece_solve(rhs, terminal_value, order, reversed_grid, names)
    return Trajectory(grid, sol.values[::-1].copy(), sol.names)


def mittag_leffler(alpha, z, *, max_terms=2000, overflow_guard=600.0):
    """
    One-parameter Mittag-Leffler function E_alpha(z) for real z.

    Power series sum_k z^k / Gamma(alpha k + 1), summed in log space so the
    Gamma function never overflows.  Summation stops once a term falls
    below 1e-16 of the partial sum.  Cancellation for large negative z
    limits accuracy, hence the ``overflow_guard`` on |z|.
    """
    alpha = check_order(alpha)
    z = float(z)
    if abs(z) > overflow_guard:
        raise ValidationError(f"|z| = {abs(z)} exceeds the series guard {overflow_guard}")
    if z == 0.0:
        return 1.0
    logz = math.log(abs(z))
    neg = z < 0
    total = 1.0
    # terms grow until alpha*k ~ |z|^(1/alpha), so no early exit before the peak
    for k in range(1, max_terms):
        mag = math.exp(k * logz - math.lgamma(alpha * k + 1))
        total += -mag if (neg and k % 2) else mag
        if mag < 1e-16 * abs(total) and alpha * k > abs(z) ** (1 / alpha):
            return total
    raise NoConvergence(f"Mittag-Leffler series did not converge in {max_terms} terms")

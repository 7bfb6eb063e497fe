"""Normalised forward sensitivity indices of R0, (dR0/dp) * p / R0."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError, ValidationError
from .model import ModelParams, basic_reproduction_number
from .solver import check_order

__all__ = [
    "R0_PARAMETERS",
    "SensitivityReport",
    "sensitivity_index",
    "sensitivity_vs_alpha",
    "r0_alpha_sensitivity",
    "alpha_sensitivity_curve",
]

# parameters the R0 expression depends on
R0_PARAMETERS = (
    "beta", "beta_prime", "l", "rho1", "rho2", "gamma_a", "gamma_i", "gamma_r",
    "delta_i", "delta_p", "delta_h",
)
# fields that are absent from R0, so their index is exactly zero
_ZERO_SUPPORT = ("kappa", "N")

REL_STEP = 1e-6
ALPHA_STEP = 1e-6


@dataclass
class SensitivityReport:
    parameter: str
    alphas: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.indices = np.asarray(self.indices, dtype=float)
        if self.alphas.shape != self.indices.shape:
            raise ValidationError("alpha grid and indices differ in length")

    def to_csv(self, directory, prefix="sensitivity"):
        path = os.path.join(directory, f"{prefix}_{self.parameter}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("alpha", "index"))
            for a, s in zip(self.alphas, self.indices):
                w.writerow((f"{a:.10g}", f"{s:.12g}"))
        return path


def _r0_checked(params, alpha):
    r0 = basic_reproduction_number(params, alpha)
    if r0 == 0:
        raise NumericalError("sensitivity index undefined: R0 = 0")
    return r0


def sensitivity_index(p: str, params: ModelParams, order) -> float:
    """Central difference with relative step 1e-6 on parameter ``p``."""
    alpha = check_order(order)
    if p in _ZERO_SUPPORT:
        return 0.0
    if p not in R0_PARAMETERS:
        raise ConfigError(f"unknown parameter {p!r}", key=p)
    r0 = _r0_checked(params, alpha)
    x = getattr(params, p)
    h = REL_STEP * abs(x)
    up = basic_reproduction_number(params.replace(**{p: x + h}), alpha)
    down = basic_reproduction_number(params.replace(**{p: x - h}), alpha)
    return (up - down) / (2 * h) * x / r0


def sensitivity_vs_alpha(p: str, params: ModelParams, alpha_grid) -> SensitivityReport:
    alphas = [check_order(a) for a in alpha_grid]
    return SensitivityReport(p, alphas, [sensitivity_index(p, params, a) for a in alphas])


def r0_alpha_sensitivity(params: ModelParams, order) -> float:
    """
    Index with respect to the derivative order itself.

    Central difference in alpha with absolute step 1e-6; at alpha = 1 the
    second-order backward stencil is used because alpha > 1 is outside the
    domain.
    """
    alpha = check_order(order)
    r0 = _r0_checked(params, alpha)
    h = ALPHA_STEP
    R = lambda a: basic_reproduction_number(params, a)
    if alpha + h > 1.0:
        d = (3 * r0 - 4 * R(alpha - h) + R(alpha - 2 * h)) / (2 * h)
    elif alpha - h <= 0.0:
        d = (-3 * r0 + 4 * R(alpha + h) - R(alpha + 2 * h)) / (2 * h)
    else:
        d = (R(alpha + h) - R(alpha - h)) / (2 * h)
    return d * alpha / r0


def alpha_sensitivity_curve(params: ModelParams, alpha_grid) -> SensitivityReport:
    alphas = [check_order(a) for a in alpha_grid]
    return SensitivityReport("alpha", alphas, [r0_alpha_sensitivity(params, a) for a in alphas])

"""
Eight-compartment COVID-19 model with super-spreaders (S, E, I, P, A, H, R, F).

Every rate constant enters the right-hand side raised to the derivative
order alpha so that both sides of ``D^alpha x = ...`` carry dimension
time^-alpha.  The dimensionless quantities ``l``, ``rho1`` and ``rho2`` are
left alone.  Passing ``variant="original"`` keeps the raw rates, which is
only dimensionally consistent at alpha = 1 and exists for comparison.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidPopulation, SingularityError, ValidationError
from .solver import check_order

__all__ = [
    "COMPARTMENTS",
    "RATE_NAMES",
    "ModelParams",
    "CompartmentState",
    "ContactReductionSchedule",
    "EffectiveRates",
    "alpha_rates",
    "rhs_uncontrolled",
    "uncontrolled_field",
    "basic_reproduction_number",
    "controlled_r0",
    "portugal_initial_conditions",
    "PORTUGAL_POPULATION",
]

COMPARTMENTS = ("S", "E", "I", "P", "A", "H", "R", "F")
RATE_NAMES = (
    "beta", "beta_prime", "kappa", "gamma_a", "gamma_i", "gamma_r",
    "delta_i", "delta_p", "delta_h",
)
VARIANTS = ("corrected", "original")

PORTUGAL_POPULATION = 10_280_000


@dataclass(frozen=True)
class ModelParams:
    """Rate constants (1/day) and proportions; defaults are the first-wave values."""

    beta: float = 2.55
    beta_prime: float = 7.65
    l: float = 1.56
    kappa: float = 0.25
    rho1: float = 0.58
    rho2: float = 0.001
    gamma_a: float = 0.94
    gamma_i: float = 0.27
    gamma_r: float = 0.5
    delta_i: float = 1 / 23
    delta_p: float = 1 / 23
    delta_h: float = 1 / 23
    N: float = PORTUGAL_POPULATION

    def __post_init__(self):
        for name in RATE_NAMES:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"rate {name} must be positive and finite, got {v}")
        if not (self.l > 0 and math.isfinite(self.l)):
            raise ValidationError(f"l must be positive, got {self.l}")
        if self.rho1 < 0 or self.rho2 < 0 or self.rho1 + self.rho2 > 1:
            raise ValidationError(
                f"need rho1, rho2 >= 0 and rho1 + rho2 <= 1, got {self.rho1}, {self.rho2}"
            )
        if not (self.N > 0):
            raise ValidationError(f"population N must be positive, got {self.N}")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class CompartmentState:
    S: float
    E: float
    I: float
    P: float
    A: float
    H: float
    R: float
    F: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in COMPARTMENTS], dtype=float)

    @classmethod
    def from_array(cls, y) -> "CompartmentState":
        return cls(*(float(x) for x in y))

    @property
    def total(self) -> float:
        return float(self.as_array().sum())


class ContactReductionSchedule:
    """
    Contact-reduction level m(t) in [0, 1] given by breakpoints.

    Between breakpoints the level is interpolated linearly or held
    piecewise constant; outside the breakpoint range it is clamped to the
    nearest endpoint level.
    """

    def __init__(self, breakpoints: Sequence[tuple[float, float]], interpolation="piecewise-linear"):
        if len(breakpoints) == 0:
            raise ValidationError("contact schedule needs at least one breakpoint")
        times = np.array([float(b[0]) for b in breakpoints])
        levels = np.array([float(b[1]) for b in breakpoints])
        if np.any(np.diff(times) <= 0):
            raise ValidationError("schedule breakpoint times must be strictly increasing")
        if np.any((levels < 0) | (levels > 1)) or not np.all(np.isfinite(levels)):
            raise ValidationError("schedule levels must lie in [0, 1]")
        if interpolation not in ("piecewise-linear", "piecewise-constant"):
            raise ValidationError(f"unknown interpolation {interpolation!r}")
        self.times = times
        self.levels = levels
        self.interpolation = interpolation

    @classmethod
    def zero(cls):
        return cls([(0.0, 0.0)])

    @classmethod
    def constant(cls, level):
        return cls([(0.0, level)])

    @property
    def max_level(self) -> float:
        return float(self.levels.max())

    def __call__(self, t):
        if self.interpolation == "piecewise-linear":
            out = np.interp(t, self.times, self.levels)
        else:
            idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 1)
            out = self.levels[idx]
        return float(out) if np.ndim(out) == 0 else out

    def __repr__(self):
        pts = ", ".join(f"({t:g}, {m:g})" for t, m in zip(self.times, self.levels))
        return f"ContactReductionSchedule([{pts}], {self.interpolation!r})"


@dataclass(frozen=True)
class EffectiveRates:
    beta: float
    beta_prime: float
    kappa: float
    gamma_a: float
    gamma_i: float
    gamma_r: float
    delta_i: float
    delta_p: float
    delta_h: float


def alpha_rates(params: ModelParams, order, variant="corrected") -> EffectiveRates:
    """Rates raised to the derivative order (``x**alpha``); l, rho1, rho2 untouched."""
    alpha = check_order(order)
    if variant not in VARIANTS:
        raise ValidationError(f"unknown model variant {variant!r}")
    e = alpha if variant == "corrected" else 1.0
    return EffectiveRates(**{k: getattr(params, k) ** e for k in RATE_NAMES})


def _derivative(y, p: ModelParams, r: EffectiveRates, m, v):
    S, E, I, P, A, H, R, F = y
    damp = 1.0 - m
    infection = damp * (r.beta * I + p.l * r.beta * H + r.beta_prime * P) * S / p.N
    vacc = v * S
    return np.array([
        -infection - vacc,
        infection - r.kappa * E,
        r.kappa * p.rho1 * E - (r.gamma_a + r.gamma_i) * I - r.delta_i * I,
        r.kappa * p.rho2 * E - (r.gamma_a + r.gamma_i) * P - r.delta_p * P,
        r.kappa * (1 - p.rho1 - p.rho2) * E,
        r.gamma_a * (I + P) - r.gamma_r * H - r.delta_h * H,
        r.gamma_i * (I + P) + r.gamma_r * H + vacc,
        r.delta_i * I + r.delta_p * P + r.delta_h * H,
    ])


def uncontrolled_field(params: ModelParams, order, m: ContactReductionSchedule | None = None,
                       variant="corrected"):
    """Vector field ``f(t, y)`` of the model with contact reduction ``m(t)``."""
    rates = alpha_rates(params, order, variant)
    if m is None:
        return lambda t, y: _derivative(y, params, rates, 0.0, 0.0)
    return lambda t, y: _derivative(y, params, rates, m(t), 0.0)


def rhs_uncontrolled(t, y, params: ModelParams, order, m: ContactReductionSchedule | None = None,
                     variant="corrected") -> np.ndarray:
    """
    Right-hand side at one instant.  All three transmission terms carry
    the factor (1 - m(t)); with ``m=None`` (or the zero schedule) this is
    the plain model.
    """
    rates = alpha_rates(params, order, variant)
    level = 0.0 if m is None else m(t)
    return _derivative(np.asarray(y, dtype=float), params, rates, level, 0.0)


def _r0_pieces(params, order):
    r = alpha_rates(params, order)
    a_i = r.gamma_a + r.gamma_i + r.delta_i
    a_p = r.gamma_a + r.gamma_i + r.delta_p
    a_h = r.gamma_r + r.delta_h
    first = r.beta * (r.gamma_a * params.l + a_h) * params.rho1 / (a_i * a_h)
    second = (r.beta * r.gamma_a * params.l + r.beta_prime * a_h) * params.rho2 / (a_p * a_h)
    return first, second


def basic_reproduction_number(params: ModelParams, order) -> float:
    first, second = _r0_pieces(params, order)
    return first + second


def controlled_r0(params: ModelParams, order, v, m, sign_corrected=False) -> float:
    """
    Reproduction number with vaccination rate ``v`` and contact reduction ``m``
    treated as parameters.

    By default the expression carries the factor (m - 1) and the division
    by v in its reference form, so it is negative for m < 1.  With
    ``sign_corrected=True`` the factor becomes (1 - m).
    """
    if v == 0:
        raise SingularityError("controlled R0 divides by the vaccination rate v; v = 0 is singular")
    if not (0.0 <= m <= 1.0):
        raise ValidationError(f"m must lie in [0, 1], got {m}")
    first, second = _r0_pieces(params, order)
    factor = (1.0 - m) if sign_corrected else (m - 1.0)
    return factor * (first + second) / v


def portugal_initial_conditions(N=PORTUGAL_POPULATION, fatalities_in_balance=True) -> CompartmentState:
    """
    State on 27 December 2020.

    68 208 active infections split 90/10 into symptomatic and
    super-spreaders, asymptomatic count (I + P) / 0.15.  Susceptibles are
    the residual after all other compartments, so the state sums to N.
    With ``fatalities_in_balance=False`` the 34 fatalities are left out of
    the residual (S = N - R - E - P - I - A - H) and the state sums to N + 34.
    """
    active = 68208.0
    recovered_initial = 278776.0
    E, H, F = 92069.0, 2366.0, 34.0
    P, I = active * 0.1, active * 0.9
    A = active / 0.15
    S = N - recovered_initial - E - P - I - A - H
    if fatalities_in_balance:
        S -= F
    if S < 0:
        raise InvalidPopulation(f"population {N} too small: residual susceptibles {S:.1f} < 0")
    return CompartmentState(S=S, E=E, I=I, P=P, A=A, H=H, R=recovered_initial, F=F)

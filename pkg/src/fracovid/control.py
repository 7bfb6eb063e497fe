"""
Fractional optimal control with vaccination v(t) and preventive measures m(t).

Minimise  J = int_0^tf (k1 I + k2 P + k3 v^2 + k4 m^2) dt  subject to the
controlled model, with 0 <= v <= v_max and 0 <= m <= m_max.

The necessary conditions are solved by a forward-backward sweep.  The
co-state system is written in reversed time t' = tf - t, where it becomes
a left-Caputo initial value problem with xi(t' = 0) = 0, so both halves of
the sweep use the same PECE integrator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import AlignmentError, ValidationError
from .model import COMPARTMENTS, ModelParams, _derivative, alpha_rates
from .solver import TimeGrid, Trajectory, check_order, pece_solve, pece_solve_reversed

log = logging.getLogger(__name__)

__all__ = [
    "ADJOINT_NAMES",
    "CostWeights",
    "ControlSchedule",
    "SweepConfig",
    "SweepResult",
    "rhs_controlled",
    "controlled_field",
    "hamiltonian",
    "adjoint_rhs",
    "adjoint_field",
    "optimal_controls",
    "forward_backward_sweep",
    "cost_functional",
]

ADJOINT_NAMES = tuple(f"xi{i}" for i in range(1, 9))

# sweep defaults
V_MAX = 0.003
RELAXATION = 0.5
TOLERANCE = 1e-3
MAX_ITERATIONS = 200


@dataclass(frozen=True)
class CostWeights:
    k1: float = 1.0
    k2: float = 5.0
    k3: float = 1.0
    k4: float = 10.0

    def __post_init__(self):
        for k in ("k1", "k2", "k3", "k4"):
            v = getattr(self, k)
            if not np.isfinite(v) or v < 0:
                raise ValidationError(f"cost weight {k} must be finite and non-negative, got {v}")
        if self.k3 <= 0 or self.k4 <= 0:
            # the control formulas divide by k3 and k4
            raise ValidationError("control weights k3 and k4 must be positive")


@dataclass
class ControlSchedule:
    """Control values on the nodes of ``grid``."""

    grid: TimeGrid
    v: np.ndarray
    m: np.ndarray
    v_max: float = np.inf
    m_max: float = 1.0

    def __post_init__(self):
        n = self.grid.n_steps + 1
        self.v = np.broadcast_to(np.asarray(self.v, dtype=float), (n,)).copy()
        self.m = np.broadcast_to(np.asarray(self.m, dtype=float), (n,)).copy()
        if np.any(self.v < 0) or np.any(self.v > self.v_max):
            raise ValidationError("vaccination control outside [0, v_max]")
        if np.any(self.m < 0) or np.any(self.m > self.m_max):
            raise ValidationError("preventive control outside [0, m_max]")

    @classmethod
    def zeros(cls, grid, v_max=np.inf, m_max=1.0):
        return cls(grid, 0.0, 0.0, v_max, m_max)


@dataclass(frozen=True)
class SweepConfig:
    v_max: float = V_MAX
    m_max: float = 1.0
    relaxation: float = RELAXATION
    tolerance: float = TOLERANCE
    max_iterations: int = MAX_ITERATIONS
    # scenario switches: a disabled control is pinned to zero
    use_v: bool = True
    use_m: bool = True

    def __post_init__(self):
        if not (0 < self.relaxation <= 1):
            raise ValidationError(f"relaxation weight must lie in (0, 1], got {self.relaxation}")
        if not (self.tolerance > 0):
            raise ValidationError("sweep tolerance must be positive")
        if self.v_max < 0 or self.m_max < 0 or self.m_max > 1:
            raise ValidationError("control bounds must satisfy v_max >= 0, 0 <= m_max <= 1")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be at least 1")


@dataclass
class SweepResult:
    state: Trajectory
    adjoint: Trajectory
    controls: ControlSchedule
    J: float
    iterations: int
    converged: bool
    residual: float
    history: list = field(default_factory=list)


def rhs_controlled(t, y, params: ModelParams, order, controls: ControlSchedule) -> np.ndarray:
    k = controls.grid.index(t)
    rates = alpha_rates(params, order)
    return _derivative(np.asarray(y, dtype=float), params, rates, controls.m[k], controls.v[k])


def controlled_field(params: ModelParams, order, controls: ControlSchedule):
    rates = alpha_rates(params, order)
    grid, v, m = controls.grid, controls.v, controls.m

    def f(t, y):
        k = grid.index(t)
        return _derivative(y, params, rates, m[k], v[k])

    return f


def hamiltonian(y, xi, v, m, params: ModelParams, order, weights: CostWeights) -> float:
    """Running cost plus co-states times the controlled right-hand side."""
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    rates = alpha_rates(params, order)
    running = weights.k1 * y[2] + weights.k2 * y[3] + weights.k3 * v**2 + weights.k4 * m**2
    return float(running + xi @ _derivative(y, params, rates, m, v))


def _adjoint_derivative(xi, S, I, P, H, v, m, params, r, w, as_printed=False):
    x1, x2, x3, x4, x5, x6, x7, x8 = xi
    N, l = params.N, params.l
    pull = (m - 1.0) * (x1 - x2)
    hosp_sign = -1.0 if as_printed else 1.0
    return np.array([
        pull * (r.beta * (I + l * H) + r.beta_prime * P) / N + (x7 - x1) * v,
        r.kappa * (-x2 + x3 * params.rho1 + x4 * params.rho2 - x5 * (params.rho1 + params.rho2 - 1)),
        w.k1 - (r.gamma_a + r.gamma_i) * x3 + r.gamma_a * x6 + r.gamma_i * x7
        + r.delta_i * (x8 - x3) + r.beta * pull * S / N,
        w.k2 - (r.gamma_a + r.gamma_i) * x4 + r.gamma_a * x6 + r.gamma_i * x7
        + r.delta_p * (x8 - x4) + r.beta_prime * pull * S / N,
        0.0,
        r.gamma_r * (x7 - x6) + r.delta_h * (x8 - x6) + hosp_sign * l * r.beta * pull * S / N,
        0.0,
        0.0,
    ])


def adjoint_field(state: Trajectory, controls: ControlSchedule, params: ModelParams, order,
                  weights: CostWeights, as_printed=False):
    """
    Co-state vector field in reversed time, ``g(t_prime, xi)``.

    State and controls are read at the node t = tf - t_prime; the grids of
    ``state`` and ``controls`` must coincide.
    """
    if state.grid != controls.grid:
        raise AlignmentError("state and control grids differ")
    rates = alpha_rates(params, order)
    grid = state.grid
    n = grid.n_steps
    S, I, P, H = (state.values[:, i] for i in (0, 2, 3, 5))
    v, m = controls.v, controls.m

    def g(t_prime, xi):
        k = n - int(round(t_prime / grid.h))
        if not (0 <= k <= n):
            raise ValidationError(f"reversed time {t_prime} outside the state trajectory")
        return _adjoint_derivative(xi, S[k], I[k], P[k], H[k], v[k], m[k], params, rates, weights,
                                   as_printed)

    return g


def adjoint_rhs(t_prime, xi, state: Trajectory, controls: ControlSchedule, params: ModelParams,
                order, weights: CostWeights, as_printed=False) -> np.ndarray:
    """
    Right-hand side of the co-state system at reversed time ``t_prime``.

    Each row equals the partial derivative of the Hamiltonian with respect
    to the matching state variable.  ``as_printed=True`` flips the sign of
    the transmission term in the xi6 row, reproducing the form in which the
    system is commonly written (which does not match dH/dH).
    """
    g = adjoint_field(state, controls, params, order, weights, as_printed)
    return g(t_prime, np.asarray(xi, dtype=float))


def optimal_controls(y, xi, params: ModelParams, order, weights: CostWeights, v_max, m_max):
    """
    Pointwise minimisers of the Hamiltonian projected onto the box.

    Works on a single state (1-D ``y``) or on whole trajectories (rows of
    ``y`` and ``xi``).
    """
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    r = alpha_rates(params, order)
    S, I, P, H = y[..., 0], y[..., 2], y[..., 3], y[..., 5]
    x1, x2, x7 = xi[..., 0], xi[..., 1], xi[..., 6]
    v = (x1 - x7) * S / (2.0 * weights.k3)
    m = (r.beta * (I + params.l * H) + r.beta_prime * P) * (x2 - x1) * S / (2.0 * weights.k4 * params.N)
    return np.clip(v, 0.0, v_max), np.clip(m, 0.0, m_max)


def cost_functional(state: Trajectory, controls: ControlSchedule, weights: CostWeights) -> float:
    """Trapezoidal quadrature of k1 I + k2 P + k3 v^2 + k4 m^2 over the grid."""
    if state.grid != controls.grid:
        raise AlignmentError("state and control grids differ")
    I, P = state.values[:, 2], state.values[:, 3]
    integrand = (weights.k1 * I + weights.k2 * P + weights.k3 * controls.v**2
                 + weights.k4 * controls.m**2)
    return float(trapezoid(integrand, dx=state.grid.h))


def _rel_change(new, old):
    scale = np.max(np.abs(new))
    diff = np.max(np.abs(new - old))
    if diff == 0.0:
        return 0.0
    return float(diff / scale) if scale > 0 else np.inf


def forward_backward_sweep(params: ModelParams, order, y0, weights: CostWeights, grid: TimeGrid,
                           sweep: SweepConfig = SweepConfig(), initial: ControlSchedule | None = None,
                           as_printed=False) -> SweepResult:
    """
    Solve the optimality system by relaxed fixed-point iteration.

    Each pass integrates the state forward under the current controls, the
    co-states backward from xi(tf) = 0, computes the projected optimal
    controls and blends them with the previous ones,
    ``new = w * optimal + (1 - w) * old``.  Stops when the largest relative
    sup-norm change over states, co-states and controls is at most
    ``sweep.tolerance``.
    """
    alpha = check_order(order)
    y0 = np.asarray(getattr(y0, "as_array", lambda: y0)(), dtype=float)
    bounds = dict(v_max=sweep.v_max if sweep.use_v else 0.0, m_max=sweep.m_max if sweep.use_m else 0.0)
    if initial is None:
        controls = ControlSchedule.zeros(grid, **bounds)
    else:
        if initial.grid != grid:
            raise AlignmentError("initial control guess lives on a different grid")
        controls = ControlSchedule(grid, np.clip(initial.v, 0, bounds["v_max"]),
                                   np.clip(initial.m, 0, bounds["m_max"]), **bounds)
    zero = np.zeros(8)
    w = sweep.relaxation
    prev_state = prev_adj = None
    history = []
    converged = False
    residual = np.inf

    for it in range(1, sweep.max_iterations + 1):
        state = pece_solve(controlled_field(params, alpha, controls), y0, alpha, grid, COMPARTMENTS)
        adj = pece_solve_reversed(adjoint_field(state, controls, params, alpha, weights, as_printed),
                                  zero, alpha, grid, ADJOINT_NAMES)
        v_opt, m_opt = optimal_controls(state.values, adj.values, params, alpha, weights, **bounds)
        v_new = np.clip(w * v_opt + (1 - w) * controls.v, 0.0, bounds["v_max"])
        m_new = np.clip(w * m_opt + (1 - w) * controls.m, 0.0, bounds["m_max"])

        changes = [_rel_change(v_new, controls.v), _rel_change(m_new, controls.m)]
        if prev_state is not None:
            changes += [_rel_change(state.values, prev_state), _rel_change(adj.values, prev_adj)]
        residual = max(changes)
        history.append(residual)
        log.debug("sweep iteration %d residual %.3e", it, residual)

        controls = ControlSchedule(grid, v_new, m_new, **bounds)
        prev_state, prev_adj = state.values, adj.values
        if residual <= sweep.tolerance:
            converged = True
            break

    if not converged:
        log.warning("sweep stopped after %d iterations, residual %.3e", it, residual)

    # projection is the last step: return the projected optimum of the final
    # pass, then re-solve so state and co-states match the returned controls
    controls = ControlSchedule(grid, v_opt, m_opt, **bounds)
    state = pece_solve(controlled_field(params, alpha, controls), y0, alpha, grid, COMPARTMENTS)
    adj = pece_solve_reversed(adjoint_field(state, controls, params, alpha, weights, as_printed),
                              zero, alpha, grid, ADJOINT_NAMES)
    J = cost_functional(state, controls, weights)
    return SweepResult(state, adj, controls, J, it, converged, residual, history)

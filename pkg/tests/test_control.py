import numpy as np
import pytest
from scipy.integrate import simpson

from fracovid.control import (ADJOINT_NAMES, ControlSchedule, CostWeights, SweepConfig,
                              adjoint_rhs, controlled_field, cost_functional,
                              forward_backward_sweep, hamiltonian, optimal_controls, rhs_controlled)
from fracovid.errors import AlignmentError, ValidationError
from fracovid.model import COMPARTMENTS, ModelParams, portugal_initial_conditions, rhs_uncontrolled
from fracovid.solver import TimeGrid, Trajectory, pece_solve

from oracles import FIRST_WAVE, classical_sweep

N = 10_280_000
Y0 = portugal_initial_conditions().as_array()
GRID = TimeGrid(0, 52, 0.1)
Y = np.array([8.1e6, 9e4, 6e4, 7e3, 5e5, 3e3, 4e5, 900.0])
XI = np.array([0.8, 1.3, 2.1, 4.0, 0.0, 1.7, 0.2, 0.0])


def fd_gradient(f, x, h=1e-3):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h * max(1.0, abs(x[i]))
        g[i] = (f(x + e) - f(x - e)) / (2 * e[i])
    return g


def single_node(y, v, m):
    grid = TimeGrid(0, 1, 1)
    state = Trajectory(grid, np.vstack([y, y]), COMPARTMENTS)
    return state, ControlSchedule(grid, v, m)


class TestWeights:
    def test_defaults(self):
        assert CostWeights() == CostWeights(1, 5, 1, 10)

    def test_zero_running_weights_allowed(self):
        CostWeights(0, 0, 1, 1)

    @pytest.mark.parametrize("w", [(1, 5, 0, 10), (1, 5, 1, 0), (-1, 5, 1, 10), (np.nan, 5, 1, 10)])
    def test_invalid(self, w):
        with pytest.raises(ValidationError):
            CostWeights(*w)


def test_schedule_bounds():
    with pytest.raises(ValidationError):
        ControlSchedule(GRID, 0.004, 0.0, v_max=0.003)
    with pytest.raises(ValidationError):
        ControlSchedule(GRID, 0.0, -0.1)


@pytest.mark.parametrize("kw", [dict(relaxation=0), dict(relaxation=1.5), dict(tolerance=0),
                                dict(m_max=1.2), dict(max_iterations=0)])
def test_invalid_sweep_config(kw):
    with pytest.raises(ValidationError):
        SweepConfig(**kw)


def test_controlled_rhs_with_zero_controls_is_uncontrolled():
    c = ControlSchedule.zeros(GRID)
    for a in (1.0, 0.9):
        assert np.array_equal(rhs_controlled(3.0, Y, ModelParams(), a, c),
                              rhs_uncontrolled(3.0, Y, ModelParams(), a))


def test_vaccination_moves_susceptibles_to_recovered():
    c = ControlSchedule(GRID, 0.002, 0.0)
    d = rhs_controlled(0.0, Y, ModelParams(), 1.0, c) - rhs_uncontrolled(0.0, Y, ModelParams(), 1.0)
    assert d[0] == pytest.approx(-0.002 * Y[0]) and d[6] == pytest.approx(0.002 * Y[0])


class TestAdjoint:
    @pytest.mark.parametrize("alpha", [1.0, 0.9])
    def test_rows_are_hamiltonian_gradient(self, alpha):
        p, w, v, m = ModelParams(), CostWeights(), 0.002, 0.3
        grad = fd_gradient(lambda y: hamiltonian(y, XI, v, m, p, alpha, w), Y)
        state, ctrl = single_node(Y, v, m)
        got = adjoint_rhs(0.0, XI, state, ctrl, p, alpha, w)
        np.testing.assert_allclose(got, grad, rtol=1e-7, atol=1e-9)

    def test_absent_compartments_have_zero_rows(self):
        state, ctrl = single_node(Y, 0.002, 0.3)
        got = adjoint_rhs(0.0, XI, state, ctrl, ModelParams(), 0.95, CostWeights())
        assert got[4] == got[6] == got[7] == 0.0

    def test_as_printed_hospital_row_differs(self):
        p, w = ModelParams(), CostWeights()
        state, ctrl = single_node(Y, 0.002, 0.3)
        good = adjoint_rhs(0.0, XI, state, ctrl, p, 1.0, w)
        printed = adjoint_rhs(0.0, XI, state, ctrl, p, 1.0, w, as_printed=True)
        transmission = p.l * p.beta * (0.3 - 1) * (XI[0] - XI[1]) * Y[0] / N
        assert printed[5] - good[5] == pytest.approx(-2 * transmission, rel=1e-12)
        np.testing.assert_array_equal(np.delete(printed, 5), np.delete(good, 5))

    def test_grid_mismatch(self):
        state, _ = single_node(Y, 0.0, 0.0)
        with pytest.raises(AlignmentError):
            adjoint_rhs(0.0, XI, state, ControlSchedule.zeros(GRID), ModelParams(), 1.0,
                        CostWeights())


class TestOptimalControls:
    def test_hand_example(self):
        y = np.zeros(8)
        y[0], y[2] = N, 0.1
        xi = np.zeros(8)
        xi[1] = 1.0
        v, m = optimal_controls(y, xi, ModelParams(), 1.0, CostWeights(), 0.003, 1.0)
        # beta * I * (xi2 - xi1) * S / (2 k4 N) = 2.55 * 0.1 / 20
        assert m == pytest.approx(0.01275, rel=1e-14) and v == 0.0

    def test_projection(self):
        y = np.zeros(8)
        y[0], y[2] = N, 1e5
        xi = np.zeros(8)
        xi[0], xi[1] = 1e-9, 1.0
        v, m = optimal_controls(y, xi, ModelParams(), 1.0, CostWeights(), 0.003, 0.74)
        assert v == 0.003 and m == 0.74
        xi[1], xi[6] = -1.0, 1.0
        assert optimal_controls(y, xi, ModelParams(), 1.0, CostWeights(), 0.003, 0.74) == (0, 0)

    def test_stationarity_of_hamiltonian(self):
        # running state costs are constant in (v, m); drop them so rounding does not hide H
        p, w = ModelParams(), CostWeights(0, 0, 1, 10)
        xi = np.array([5e-10, 3.5e-5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        v, m = optimal_controls(Y, xi, p, 0.9, w, np.inf, 1.0)
        assert 0 < v and 0 < m < 1
        H = lambda v, m: hamiltonian(Y, xi, v, m, p, 0.9, w)
        for dv, dm in ((0.1 * v, 0), (-0.1 * v, 0), (0, 0.1 * m), (0, -0.1 * m)):
            assert H(v + dv, m + dm) > H(v, m)


def test_cost_functional_against_simpson():
    c = ControlSchedule(GRID, 0.001 * (1 + np.sin(GRID.times / 9)), 0.3 * np.exp(-GRID.times / 20))
    state = pece_solve(controlled_field(ModelParams(), 1.0, c), Y0, 1.0, GRID, COMPARTMENTS)
    w = CostWeights()
    integrand = (w.k1 * state["I"] + w.k2 * state["P"] + w.k3 * c.v**2 + w.k4 * c.m**2)
    assert cost_functional(state, c, w) == pytest.approx(simpson(integrand, x=GRID.times), rel=1e-4)


def test_cost_functional_grid_mismatch():
    state, _ = single_node(Y, 0.0, 0.0)
    with pytest.raises(AlignmentError):
        cost_functional(state, ControlSchedule.zeros(GRID), CostWeights())


@pytest.fixture(scope="module")
def both():
    return forward_backward_sweep(ModelParams(), 1.0, Y0, CostWeights(), GRID, SweepConfig(m_max=0.74))


class TestSweep:
    def test_converges(self, both):
        assert both.converged and both.residual <= 1e-3
        assert both.iterations == len(both.history) < 50

    def test_controls_in_box(self, both):
        assert 0 <= both.controls.v.min() and both.controls.v.max() <= 0.003
        assert 0 <= both.controls.m.min() and both.controls.m.max() <= 0.74

    def test_transversality(self, both):
        assert np.all(both.adjoint.values[-1] == 0)
        assert both.adjoint.names == ADJOINT_NAMES

    def test_controls_are_projected_optimum_of_returned_state(self, both):
        v, m = optimal_controls(both.state.values, both.adjoint.values, ModelParams(), 1.0,
                                CostWeights(), 0.003, 0.74)
        assert np.max(np.abs(v - both.controls.v)) <= 1e-2 * 0.003
        assert np.max(np.abs(m - both.controls.m)) <= 1e-2 * 0.74

    def test_beats_no_control(self, both):
        zero = ControlSchedule.zeros(GRID)
        free = pece_solve(controlled_field(ModelParams(), 1.0, zero), Y0, 1.0, GRID, COMPARTMENTS)
        assert both.J < cost_functional(free, zero, CostWeights())

    def test_conservation(self, both):
        total = both.state.values.sum(axis=1)
        assert np.max(np.abs(total - total[0])) <= 1e-6 * N

    def test_matches_classical_rk4_sweep(self, both):
        ref = classical_sweep(FIRST_WAVE, N, Y0, 52, 0.1, (1, 5, 1, 10), 0.003, 0.74)
        assert both.J == pytest.approx(ref[5], rel=0.01)

    def test_no_running_cost_stops_at_once(self):
        r = forward_backward_sweep(ModelParams(), 0.9, Y0, CostWeights(0, 0, 1, 10), GRID,
                                   SweepConfig(m_max=0.74))
        assert r.converged and r.iterations == 1
        assert np.all(r.controls.v == 0) and np.all(r.controls.m == 0)
        assert np.all(r.adjoint.values == 0)

    def test_disabled_control_pinned_to_zero(self):
        r = forward_backward_sweep(ModelParams(), 1.0, Y0, CostWeights(), GRID,
                                   SweepConfig(m_max=0.74, use_m=False))
        assert np.all(r.controls.m == 0) and r.controls.v.max() > 0

    def test_iteration_cap(self):
        r = forward_backward_sweep(ModelParams(), 1.0, Y0, CostWeights(), GRID,
                                   SweepConfig(m_max=0.74, max_iterations=2))
        assert not r.converged and r.iterations == 2

    def test_initial_guess_grid_mismatch(self):
        with pytest.raises(AlignmentError):
            forward_backward_sweep(ModelParams(), 1.0, Y0, CostWeights(), GRID,
                                   initial=ControlSchedule.zeros(TimeGrid(0, 10, 0.1)))

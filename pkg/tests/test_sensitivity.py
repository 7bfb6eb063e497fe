import csv

import numpy as np
import pytest

from fracovid.errors import ConfigError, NumericalError, ValidationError
from fracovid.model import ModelParams, basic_reproduction_number
from fracovid.sensitivity import (R0_PARAMETERS, SensitivityReport, alpha_sensitivity_curve,
                                  r0_alpha_sensitivity, sensitivity_index, sensitivity_vs_alpha)

from oracles import richardson_backward, richardson_derivative

GRID = [round(0.5 + 0.05 * k, 2) for k in range(11)]
UNIT = dict(beta=1, beta_prime=1, kappa=1, gamma_a=1, gamma_i=1, gamma_r=1,
            delta_i=1, delta_p=1, delta_h=1)


def oracle_index(p, params, alpha):
    x = getattr(params, p)
    f = lambda u: basic_reproduction_number(params.replace(**{p: u}), alpha)
    return richardson_derivative(f, x, 0.01 * x) * x / f(x)


@pytest.mark.parametrize("p", R0_PARAMETERS)
@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0])
def test_index_matches_richardson_oracle(p, alpha):
    params = ModelParams()
    ref = oracle_index(p, params, alpha)
    assert sensitivity_index(p, params, alpha) == pytest.approx(ref, rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("alpha", GRID)
def test_absent_parameters_are_exactly_zero(alpha):
    assert sensitivity_index("kappa", ModelParams(), alpha) == 0.0
    assert sensitivity_index("N", ModelParams(), alpha) == 0.0


@pytest.mark.parametrize("alpha", GRID)
def test_power_law_case(alpha):
    assert abs(sensitivity_index("beta", ModelParams(rho2=0), alpha) - alpha) <= 1e-8


def test_scale_invariance():
    # rescaling beta and l so the product l*beta is unchanged leaves Upsilon_beta in the
    # rho2 = 0 case equal to alpha, whatever the units of beta
    for c in (0.1, 10.0):
        p = ModelParams(rho2=0).replace(beta=2.55 * c, l=1.56 / c)
        assert abs(sensitivity_index("beta", p, 0.9) - 0.9) <= 1e-8


def test_most_sensitive_parameters_classical():
    p = ModelParams()
    idx = {k: sensitivity_index(k, p, 1.0) for k in ("beta", "beta_prime", "rho1", "rho2", "l")}
    top = sorted(idx, key=idx.get, reverse=True)[:3]
    assert set(top) == {"beta", "rho1", "l"}
    assert all(idx[k] > 0 for k in top)


def test_frozen_classical_indices():
    # Richardson-extrapolated oracle values at alpha = 1, default parameters
    p = ModelParams()
    assert sensitivity_index("beta", p, 1.0) == pytest.approx(0.998605067, abs=1e-8)
    assert sensitivity_index("rho1", p, 1.0) == pytest.approx(0.997350475, abs=1e-8)
    assert sensitivity_index("l", p, 1.0) == pytest.approx(0.728917936, abs=1e-8)


def test_beta_magnitude_shrinks_with_alpha():
    ind = np.abs(sensitivity_vs_alpha("beta", ModelParams(), GRID).indices)
    assert np.all(np.diff(ind) > 0)


def test_unknown_parameter():
    with pytest.raises(ConfigError):
        sensitivity_index("omega", ModelParams(), 0.9)


def test_undefined_when_r0_vanishes():
    with pytest.raises(NumericalError):
        sensitivity_index("beta", ModelParams(rho1=0, rho2=0), 0.9)


def test_invalid_order():
    with pytest.raises(ValidationError):
        sensitivity_index("beta", ModelParams(), 1.5)


class TestAlphaIndex:
    @pytest.mark.parametrize("alpha", [0.5, 0.77, 1.0])
    def test_unit_rates_are_invariant(self, alpha):
        assert abs(r0_alpha_sensitivity(ModelParams(**UNIT), alpha)) < 1e-8

    @pytest.mark.parametrize("alpha", [0.55, 0.8, 0.95])
    def test_interior_oracle(self, alpha):
        p = ModelParams()
        f = lambda a: basic_reproduction_number(p, a)
        ref = richardson_derivative(f, alpha, 0.02) * alpha / f(alpha)
        assert r0_alpha_sensitivity(p, alpha) == pytest.approx(ref, rel=1e-6)

    def test_boundary_oracle(self):
        p = ModelParams()
        f = lambda a: basic_reproduction_number(p, a)
        ref = richardson_backward(f, 1.0, 0.02) * 1.0 / f(1.0)
        assert r0_alpha_sensitivity(p, 1.0) == pytest.approx(ref, rel=1e-6)

    def test_decreases_with_alpha(self):
        curve = alpha_sensitivity_curve(ModelParams(), GRID).indices
        assert np.all(np.diff(curve) > 0)


def test_report_csv(tmp_path):
    rep = sensitivity_vs_alpha("rho1", ModelParams(), [0.5, 0.75, 1.0])
    path = rep.to_csv(tmp_path)
    assert path.endswith("sensitivity_rho1.csv")
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["alpha", "index"] and len(rows) == 4
    assert all(np.isfinite(float(r[1])) for r in rows[1:])


def test_report_shape_mismatch():
    with pytest.raises(ValidationError):
        SensitivityReport("beta", [0.5, 1.0], [0.1])

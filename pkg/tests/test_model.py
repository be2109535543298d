"""Diffusion definitions, built-in families and standing-condition checks."""

import math

import numpy as np
import pytest

from svmart.model import (
    Check,
    DiffusionSpec,
    MODEL_IDS,
    b_nontrivial,
    builtin,
    check_conditions,
    model_parameters,
    tilde,
)
from svmart.quad import EvaluationError


def zero(x):
    return np.zeros_like(x)


def one(x):
    return np.ones_like(x)


HESTON = dict(kappa=1.0, theta=1.0, xi=2.0, rho=0.0)


def test_builtin_ids_and_parameters():
    assert set(MODEL_IDS) == {"heston", "three_halves", "schobel_zhu", "hull_white"}
    assert model_parameters("hull_white") == ("mu", "sigma", "rho")


def test_heston_coefficients():
    s = builtin("heston", HESTON)
    x = np.array([0.25, 1.0, 4.0])
    np.testing.assert_allclose(s.mu(x), 1.0 - x)
    np.testing.assert_allclose(s.sigma(x), 2.0 * np.sqrt(x))
    np.testing.assert_allclose(s.b(x), np.sqrt(x))
    assert s.interval == (0.0, math.inf)


def test_schobel_zhu_state_spaces():
    p = dict(kappa=1.0, theta=1.0, gamma=2.0, rho=0.0)
    assert builtin("schobel_zhu", p).interval == (-math.inf, math.inf)
    assert builtin("schobel_zhu", p, state_space="half_line").interval == (0.0, math.inf)
    with pytest.raises(ValueError):
        builtin("schobel_zhu", p, state_space="circle")
    with pytest.raises(ValueError):
        builtin("heston", HESTON, state_space="half_line")


@pytest.mark.parametrize("bad", [
    dict(kappa=1.0, theta=1.0, xi=2.0),
    dict(kappa=1.0, theta=1.0, xi=2.0, rho=0.0, extra=1.0),
    dict(kappa=-1.0, theta=1.0, xi=2.0, rho=0.0),
    dict(kappa=1.0, theta=1.0, xi=2.0, rho=1.5),
])
def test_builtin_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        builtin("heston", bad)


def test_spec_validation():
    with pytest.raises(ValueError):
        DiffusionSpec(zero, one, zero, (1.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        DiffusionSpec(zero, one, zero, (0.0, 1.0), 1.0)
    with pytest.raises(ValueError):
        DiffusionSpec(zero, one, zero, (0.0, 1.0), 0.5, correlation=2.0)
    with pytest.raises(ValueError):
        DiffusionSpec(zero, one, zero, (0.0, 1.0), 0.5, reference_point=1.5)


def test_reference_point_defaults_to_start():
    s = builtin("heston", HESTON, x0=0.7)
    assert s.c == 0.7
    assert s.with_reference(2.0).c == 2.0


def test_tilde_adds_correlated_drift():
    s = builtin("heston", dict(HESTON, rho=0.5))
    t = tilde(s)
    x = np.array([0.5, 2.0])
    np.testing.assert_allclose(t.mu(x), s.mu(x) + 0.5 * s.b(x) * s.sigma(x))
    assert tilde(builtin("heston", HESTON)).mu(x).tolist() == builtin("heston", HESTON).mu(x).tolist()


def test_conditions_hold_for_heston():
    r = check_conditions(builtin("heston", HESTON))
    assert r.es_condition is Check.HOLDS
    assert r.b_local_integrability is Check.HOLDS
    assert r.b_nontrivial is Check.HOLDS
    assert r.all_hold
    names = {w.integrand for w in r.witnesses}
    assert names == {"1/sigma^2", "mu/sigma^2", "b^2/sigma^2"}


def test_heston_witness_values():
    # b²/σ² = 1/4 for Heston with ξ = 2, so the integral is a quarter of the length
    r = check_conditions(builtin("heston", HESTON))
    for w in r.witnesses:
        if w.integrand == "b^2/sigma^2":
            assert w.estimate == pytest.approx((w.upper - w.lower) / 4.0, rel=1e-8)
        if w.integrand == "1/sigma^2":
            assert w.estimate == pytest.approx(math.log(w.upper / w.lower) / 4.0, rel=1e-8)


def test_vanishing_diffusion_fails():
    spec = DiffusionSpec(zero, lambda x: x - 0.5, one, (0.0, 1.0), 0.25)
    r = check_conditions(spec)
    assert r.es_condition is Check.FAILS
    assert any(w.lower <= 0.5 <= w.upper for w in r.witnesses)


def test_zero_exponent_is_trivial():
    spec = DiffusionSpec(zero, one, zero, (0.0, 1.0), 0.5)
    assert b_nontrivial(spec) is Check.FAILS
    assert check_conditions(spec).b_nontrivial is Check.FAILS
    assert b_nontrivial(builtin("heston", HESTON)) is Check.HOLDS


def test_evaluation_failure_names_the_point():
    spec = DiffusionSpec(lambda x: np.where(x > 0.6, np.nan, 0.0), one, one, (0.0, 1.0), 0.5)
    with pytest.raises(EvaluationError) as info:
        check_conditions(spec)
    assert info.value.point > 0.6

"""Scale function, test functions and boundary profiles."""

import math

import numpy as np
import pytest

from svmart.model import DiffusionSpec, builtin
from svmart.quad import FINITE, INCONCLUSIVE, INFINITE, Kind
from svmart.scale import (
    BoundaryProfile,
    Measure,
    ProfileInconsistency,
    boundary_profile,
    scale_density,
    scale_function,
    test_functions as probe_test_functions,
)

# Heston κ=1, θ=1, ξ=2, ρ=0 with c=1 has s'(y) = y^{-1/2} e^{(y-1)/2};
# values below are mpmath quadratures of that density at 30 digits
HESTON = builtin("heston", dict(kappa=1.0, theta=1.0, xi=2.0, rho=0.0))
S_AT_HALF = -0.514616406538094138155141413244
S_AT_TWO = 1.0596627698136566832390922343
S_AT_ZERO = -1.44955691801415265507401169995
V_AT_FOUR = 1.76423834429631415124061388556
VB_AT_FOUR = 3.05113654413515276201512254535
V_AT_QUARTER = 0.221491511090535370734324622835
DENSITY_AT_THREE = 1.56940074539409789199130355699


def test_scale_density():
    assert scale_density(HESTON, 3.0) == pytest.approx(DENSITY_AT_THREE, rel=1e-10)
    assert scale_density(HESTON, 1.0) == 1.0


def test_scale_function_values():
    assert scale_function(HESTON, 0.5) == pytest.approx(S_AT_HALF, rel=1e-9)
    assert scale_function(HESTON, 2.0) == pytest.approx(S_AT_TWO, rel=1e-9)
    assert scale_function(HESTON, 1.0) == 0.0


def test_test_function_values():
    v, vb = probe_test_functions(HESTON, 4.0)
    assert v == pytest.approx(V_AT_FOUR, rel=1e-9)
    assert vb == pytest.approx(VB_AT_FOUR, rel=1e-9)
    v, _ = probe_test_functions(HESTON, 0.25)
    assert v == pytest.approx(V_AT_QUARTER, rel=1e-9)
    assert probe_test_functions(HESTON, 1.0) == (0.0, 0.0)


def test_points_outside_the_interval_are_rejected():
    with pytest.raises(ValueError):
        scale_function(HESTON, -1.0)
    with pytest.raises(ValueError):
        probe_test_functions(HESTON, 0.0)


def test_boundary_limit_of_scale_function():
    p = boundary_profile(HESTON)
    assert p.s_left.finite
    assert p.s_left_limit == pytest.approx(S_AT_ZERO, rel=1e-9)
    assert p.s_right_limit is None


def test_driftless_unit_diffusion_is_affine():
    spec = DiffusionSpec(lambda x: np.zeros_like(x), lambda x: np.ones_like(x), lambda x: np.ones_like(x),
                         (0.0, 1.0), 0.25)
    assert scale_function(spec, 0.75) == pytest.approx(0.5, rel=1e-12)
    p = boundary_profile(spec)
    assert p.s_left_limit == pytest.approx(-0.25, rel=1e-9)
    assert p.s_right_limit == pytest.approx(0.75, rel=1e-9)
    assert all(getattr(p, f).finite for f in BoundaryProfile.FIELDS)


@pytest.mark.parametrize("theta", [2.0, 4.0])  # α = 1 and α = 2
def test_heston_original_without_zero_access(theta):
    p = boundary_profile(builtin("heston", dict(kappa=1.0, theta=theta, xi=2.0, rho=0.0)))
    assert all(getattr(p, f).infinite for f in BoundaryProfile.FIELDS)


def test_heston_original_with_zero_access():
    p = boundary_profile(HESTON)
    assert [getattr(p, f).kind for f in BoundaryProfile.FIELDS] == [
        Kind.FINITE, Kind.INFINITE, Kind.FINITE, Kind.INFINITE, Kind.FINITE, Kind.INFINITE]


def test_heston_tilde_equals_original_without_correlation():
    assert boundary_profile(HESTON, Measure.TILDE).same_kinds(boundary_profile(HESTON))


def test_heston_tilde_negative_gamma_reaches_infinity_in_scale():
    # ρ = 1 gives γ = β - 2ρ/ξ = 0.5 - 1 < 0, so s(∞) < ∞
    spec = builtin("heston", dict(kappa=1.0, theta=1.0, xi=2.0, rho=1.0))
    p = boundary_profile(spec, Measure.TILDE)
    assert p.s_right.finite and p.v_right.infinite


def test_profile_violations_and_check():
    bad = BoundaryProfile(Measure.ORIGINAL, INFINITE, INFINITE, FINITE, INFINITE, INFINITE, INFINITE)
    assert bad.violations() == ["v_left finite while s_left infinite"]
    ok = BoundaryProfile(Measure.ORIGINAL, FINITE, INFINITE, FINITE, INFINITE, INCONCLUSIVE, INFINITE)
    assert ok.violations() == []
    assert ok.inconclusive_fields() == ["vb_left"]


def test_inconsistent_profile_raises(monkeypatch):
    import svmart.scale as scale

    calls = iter(range(100))
    # the first classification of each side is s; report it infinite and everything else finite
    monkeypatch.setattr(scale, "classify_tail", lambda *a, **k: INFINITE if next(calls) % 3 == 0 else FINITE)
    with pytest.raises(ProfileInconsistency):
        boundary_profile(HESTON)
    calls = iter(range(100))
    p = boundary_profile(HESTON, check=False)
    assert len(p.violations()) == 4


def test_slow_tail_gives_no_boundary_limit():
    # scale density ∝ 1/(y log^1.05 y): s(∞) is finite but its tail decays like (log y)^-0.05
    from svmart.config import parse_config

    spec = parse_config("drift = 0.5 / x + 0.525 / (x * log(x))\ndiffusion = 1\nexponent = 1\n"
                        "left = 3\nright = inf\nx0 = 5\n").spec
    p = boundary_profile(spec)
    assert not p.s_right.infinite
    assert p.s_right_limit is None
    assert p.s_left_limit is not None

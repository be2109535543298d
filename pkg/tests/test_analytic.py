"""Closed-form profiles, verdicts and exit probabilities of the canonical models."""

import math

import pytest
from hypothesis import given, strategies as st

from svmart.analytic import CanonicalParams, analytic_profile, analytic_verdicts, direct_verdicts, exit_probability
from svmart.classify import ExitCase, Tri, VERDICTS, verdicts_from_profiles
from svmart.scale import Measure


def kinds(p):
    return tuple("F" if getattr(p, f).finite else "I" for f in p.FIELDS)


def test_exponents_are_recomputed():
    cp = CanonicalParams.of("heston", kappa=1.0, theta=2.0, xi=2.0, rho=0.5)
    assert cp.exponents() == pytest.approx({"alpha": 1.0, "beta": 0.5, "gamma": 0.0})
    cp = CanonicalParams.of("three_halves", omega=1.0, theta=1.0, xi=1.0, rho=1.0)
    assert cp.exponents() == pytest.approx({"a": 2.0, "a_tilde": 0.0, "d": 2.0})
    assert CanonicalParams.of("hull_white", mu=0.5, sigma=1.0, rho=0.25).exponents() == pytest.approx(
        {"alpha": 1.0, "gamma": 1.0})


def test_heston_tilde_alpha_below_one_gamma_negative():
    xi = math.sqrt(2.0)
    rho = (0.5 + 0.2) * xi / 2  # γ = β - 2ρ/ξ = 0.5 - 0.7 = -0.2
    cp = CanonicalParams.of("heston", kappa=0.5, theta=0.5, xi=xi, rho=rho)
    assert cp.exponents()["gamma"] == pytest.approx(-0.2)
    assert kinds(analytic_profile(cp, Measure.TILDE)) == ("F", "F", "F", "I", "F", "I")


@pytest.mark.parametrize("theta,rho,a_tilde_below", [(1.0, 0.0, False), (0.25, 1.0, True), (0.1, -1.0, False)])
def test_three_halves_profile(theta, rho, a_tilde_below):
    cp = CanonicalParams.of("three_halves", omega=1.0, theta=theta, xi=1.0, rho=rho)
    p = analytic_profile(cp, Measure.TILDE)
    assert p.v_left.infinite and p.vb_left.infinite and p.vb_right.infinite
    assert p.v_right.finite is a_tilde_below
    assert (cp.exponents()["a_tilde"] < -1) is a_tilde_below


def test_hull_white_tilde_critical_row():
    cp = CanonicalParams.of("hull_white", mu=0.5, sigma=1.0, rho=0.0)  # μ = σ²/2, γ = 0
    assert kinds(analytic_profile(cp, Measure.TILDE)) == ("I",) * 6


@pytest.mark.parametrize("model,params,expected", [
    ("heston", dict(kappa=2.0, theta=1.0, xi=1.0, rho=0.5), dict(true_martingale=Tri.YES, ui_martingale=Tri.NO,
                                                                 positive_at_infinity=Tri.NO)),
    ("three_halves", dict(omega=1.0, theta=1.0, xi=1.0, rho=1.0), dict(true_martingale=Tri.YES,
                                                                       ui_martingale=Tri.NO)),
    ("hull_white", dict(mu=0.3, sigma=1.0, rho=-0.2), dict(true_martingale=Tri.YES, ui_martingale=Tri.YES)),
])
def test_direct_verdict_examples(model, params, expected):
    v = direct_verdicts(CanonicalParams.of(model, **params))
    assert {k: v[k] for k in expected} == expected


def test_heston_without_correlation_has_equal_measures():
    for theta in (0.3, 1.0, 2.0, 5.0):
        cp = CanonicalParams.of("heston", kappa=1.0, theta=theta, xi=2.0, rho=0.0)
        assert analytic_profile(cp, Measure.TILDE).same_kinds(analytic_profile(cp, Measure.ORIGINAL))


def test_invalid_parameters_are_rejected():
    with pytest.raises(ValueError):
        CanonicalParams.of("heston", kappa=1.0, theta=1.0, xi=2.0, rho=1.5)
    with pytest.raises(ValueError):
        CanonicalParams.of("schobel_zhu", kappa=1.0, theta=-1.0, gamma=1.0, rho=0.0)
    with pytest.raises(ValueError):
        CanonicalParams.of("heston", kappa=1.0, theta=1.0, xi=2.0)
    with pytest.raises(ValueError):
        CanonicalParams.of("heston", state_space="half_line", kappa=1.0, theta=1.0, xi=2.0, rho=0.0)


# right-exit probabilities from mpmath quadrature of the scale density, 30 digits
@pytest.mark.parametrize("model,space,params,measure,x0,expected", [
    ("schobel_zhu", "real_line", dict(kappa=1.0, theta=1.0, gamma=2.0, rho=0.75), Measure.TILDE, 0.0,
     0.841344746068542948585232545632),
    ("schobel_zhu", "real_line", dict(kappa=1.0, theta=1.0, gamma=2.0, rho=0.75), Measure.TILDE, 1.0,
     0.93319279873114193399550595902),
    ("schobel_zhu", "half_line", dict(kappa=1.0, theta=1.0, gamma=2.0, rho=0.75), Measure.TILDE, 1.0,
     0.578915922332326855748947152511),
    ("schobel_zhu", "half_line", dict(kappa=1.0, theta=1.0, gamma=2.0, rho=0.5), Measure.TILDE, 1.0,
     0.393469340287366576396200465009),
    ("heston", None, dict(kappa=1.0, theta=1.0, xi=2.0, rho=1.0), Measure.TILDE, 1.0,
     0.682689492137085895383403515427),
    ("hull_white", None, dict(mu=0.1, sigma=1.0, rho=0.3), Measure.TILDE, 1.0,
     0.469873939084268520342858011469),
    ("hull_white", None, dict(mu=0.1, sigma=1.0, rho=0.3), Measure.TILDE, 0.7,
     0.392661307225697332362980603745),
])
def test_exit_probability_closed_forms(model, space, params, measure, x0, expected):
    cp = CanonicalParams.of(model, state_space=space, **params)
    assert exit_probability(cp, measure, x0) == pytest.approx(expected, rel=1e-12)


def test_exit_probability_absent_without_two_sided_exit():
    cp = CanonicalParams.of("heston", kappa=1.0, theta=1.0, xi=2.0, rho=0.0)
    assert exit_probability(cp, Measure.ORIGINAL, 1.0) is None
    r = analytic_verdicts(cp)
    assert r.exit_original.case is ExitCase.LEFT_ONLY and r.exit_original.exit_prob_right is None


# ---------------------------------------------------------------------------
# randomized canonical parameters
# ---------------------------------------------------------------------------

pos = st.floats(0.05, 5.0)
rho = st.floats(-1.0, 1.0)
canonical = st.one_of(
    st.builds(lambda k, t, x, r: CanonicalParams.of("heston", kappa=k, theta=t, xi=x, rho=r), pos, pos, pos, rho),
    st.builds(lambda w, t, x, r: CanonicalParams.of("three_halves", omega=w, theta=t, xi=x, rho=r),
              pos, st.floats(-5.0, 5.0), pos, rho),
    st.builds(lambda k, t, g, r, s: CanonicalParams.of("schobel_zhu", state_space=s, kappa=k, theta=t, gamma=g,
                                                       rho=r), pos, pos, pos, rho,
              st.sampled_from(["real_line", "half_line"])),
    st.builds(lambda m, s, r: CanonicalParams.of("hull_white", mu=m, sigma=s, rho=r), pos, pos, rho),
)


@given(canonical)
def test_direct_verdicts_match_profile_rules(cp):
    # two independent routes: inequalities in the exponents and the generic rules on closed-form profiles
    direct = direct_verdicts(cp)
    rules = verdicts_from_profiles(analytic_profile(cp, Measure.ORIGINAL), analytic_profile(cp, Measure.TILDE),
                                   Tri.YES)
    assert {k: v for k, (v, _) in rules.items()} == direct


@given(canonical)
def test_analytic_report_invariants(cp):
    r = analytic_verdicts(cp)
    assert r.invariant_violations() == []
    assert all(v.definite for v in r.verdicts().values())
    assert (r.absorbed_at_zero is Tri.YES) == (r.positive_at_infinity is Tri.NO)
    for p in (r.profile_original, r.profile_tilde):
        assert all(getattr(p, f).definite for f in p.FIELDS)
    for e in (r.exit_original, r.exit_tilde):
        if e.case is ExitCase.BOTH:
            assert 0.0 <= e.exit_prob_right <= 1.0


@given(canonical)
def test_positivity_ignores_correlation(cp):
    flipped = CanonicalParams(cp.model_id, tuple((k, 0.0 if k == "rho" else v) for k, v in cp.params),
                              cp.state_space)
    a, b = direct_verdicts(cp), direct_verdicts(flipped)
    for name in ("positive_finite_T", "positive_at_infinity", "absorbed_at_zero"):
        assert a[name] is b[name]
    assert analytic_profile(cp, Measure.ORIGINAL).same_kinds(analytic_profile(flipped, Measure.ORIGINAL))
    assert set(VERDICTS) == set(a)

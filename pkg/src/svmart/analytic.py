"""Closed-form boundary classifications and verdicts for the four canonical models.

Rule dispatch reads only the derived exponents:

* Heston: ``α = 2κθ/ξ²``, ``β = 2κ/ξ²``, ``γ = β - 2ρ/ξ``
* 3/2: ``a = 2θ/ξ²``, ``ã = a - 2ρ/ξ``, ``d = 2ω/ξ²``
* Schöbel-Zhu: ``α = κ - ργ``
* Hull-White: ``α = 4μ/σ² - 1``, ``γ = 4ρ/σ``

The Schöbel-Zhu volatility lives either on the whole line or on the half line
stopped at zero; the two settings have different profiles and both are
covered.  Verdicts are evaluated from direct inequalities in the exponents,
independently of the profile-based rules in :mod:`svmart.classify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special

from .classify import (ExitBehavior, ExitCase, MartingaleReport, Tri, feller_exit, phi_perpetual)
from .model import DiffusionSpec, MODEL_IDS, model_parameters
from .quad import FINITE, INFINITE, Finiteness
from .scale import BoundaryProfile, Measure

STATE_SPACES = ("real_line", "half_line")


@dataclass(frozen=True)
class CanonicalParams:
    """Parameters of a canonical model; derived exponents are computed on access."""

    model_id: str
    params: tuple[tuple[str, float], ...]
    state_space: str | None = None

    def __post_init__(self):
        names = model_parameters(self.model_id)
        given = dict(self.params)
        if sorted(given) != sorted(names):
            raise ValueError(f"{self.model_id} takes parameters {names}, got {tuple(given)}")
        object.__setattr__(self, "params", tuple((n, float(given[n])) for n in names))
        p = self.p
        if not -1.0 <= p["rho"] <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {p['rho']}")
        positive = {"heston": ("kappa", "theta", "xi"), "three_halves": ("omega", "xi"),
                    "schobel_zhu": ("kappa", "theta", "gamma"), "hull_white": ("mu", "sigma")}[self.model_id]
        for n in positive:
            if not p[n] > 0:
                raise ValueError(f"{n} must be positive for {self.model_id}, got {p[n]}; "
                                 "the closed-form tables do not cover this range")
        if self.model_id == "schobel_zhu":
            if self.state_space is None:
                object.__setattr__(self, "state_space", "real_line")
            elif self.state_space not in STATE_SPACES:
                raise ValueError(f"state_space must be one of {STATE_SPACES}, got {self.state_space!r}")
        elif self.state_space is not None:
            raise ValueError("state_space only applies to schobel_zhu")

    @classmethod
    def of(cls, model_id: str, state_space: str | None = None, **params: float) -> "CanonicalParams":
        return cls(model_id, tuple(params.items()), state_space)

    @classmethod
    def from_spec(cls, spec: DiffusionSpec) -> "CanonicalParams":
        d = spec.descriptor
        if d is None or d.model_id not in MODEL_IDS:
            raise ValueError("spec carries no canonical model descriptor")
        return cls(d.model_id, d.params, d.state_space)

    @property
    def p(self) -> dict[str, float]:
        return dict(self.params)

    def exponents(self) -> dict[str, float]:
        p = self.p
        if self.model_id == "heston":
            k, th, xi, rho = p["kappa"], p["theta"], p["xi"], p["rho"]
            beta = 2 * k / xi ** 2
            return {"alpha": 2 * k * th / xi ** 2, "beta": beta, "gamma": beta - 2 * rho / xi}
        if self.model_id == "three_halves":
            th, xi, rho = p["theta"], p["xi"], p["rho"]
            a = 2 * th / xi ** 2
            return {"a": a, "a_tilde": a - 2 * rho / xi, "d": 2 * p["omega"] / xi ** 2}
        if self.model_id == "schobel_zhu":
            return {"alpha": p["kappa"] - p["rho"] * p["gamma"]}
        return {"alpha": 4 * p["mu"] / p["sigma"] ** 2 - 1, "gamma": 4 * p["rho"] / p["sigma"]}


def exponents_of(spec: DiffusionSpec) -> tuple[tuple[str, float], ...]:
    return tuple(CanonicalParams.from_spec(spec).exponents().items())


def _f(finite: bool) -> Finiteness:
    return FINITE if finite else INFINITE


def _profile(measure: Measure, s_l: bool, s_r: bool, v_l: bool, v_r: bool, vb_l: bool, vb_r: bool) -> BoundaryProfile:
    return BoundaryProfile(measure, _f(s_l), _f(s_r), _f(v_l), _f(v_r), _f(vb_l), _f(vb_r))


def analytic_profile(params: CanonicalParams, measure: Measure = Measure.ORIGINAL) -> BoundaryProfile:
    """Exact finiteness of ``s``, ``v``, ``v_b`` at both ends (``True`` in a slot means finite)."""
    e = params.exponents()
    tilde = measure is Measure.TILDE
    if params.model_id == "heston":
        alpha = e["alpha"]
        g = e["gamma"] if tilde else e["beta"]
        near_zero = alpha < 1
        s_r = g < 0 or (g == 0 and alpha > 1)
        return _profile(measure, near_zero, s_r, near_zero, False, near_zero, False)
    if params.model_id == "three_halves":
        a = e["a_tilde"] if tilde else e["a"]
        return _profile(measure, False, a < -1, False, a < -1, False, False)
    if params.model_id == "schobel_zhu":
        alpha = e["alpha"] if tilde else params.p["kappa"]
        if params.state_space == "half_line":
            # zero is a regular point of the Ornstein-Uhlenbeck dynamics
            return _profile(measure, True, alpha <= 0, True, False, True, False)
        return _profile(measure, alpha < 0, alpha <= 0, False, False, False, False)
    alpha = e["alpha"]
    g = e["gamma"] if tilde else 0.0
    s_r = g > 0 or (g == 0 and alpha > 1)
    return _profile(measure, alpha < 1, s_r, False, g > 0, alpha < 1, False)


def exit_probability(params: CanonicalParams, measure: Measure, x0: float) -> float | None:
    """Closed-form ``P(Y exits at r)`` when both boundaries are reachable, else ``None``."""
    prof = analytic_profile(params, measure)
    if prof.s_left.infinite or prof.s_right.infinite:
        return None
    e, p = params.exponents(), params.p
    if params.model_id == "heston":
        # scale density ∝ y^{-α} e^{γ y} with α < 1, γ < 0
        return float(special.gammainc(1.0 - e["alpha"], -e["gamma"] * x0))
    if params.model_id == "hull_white":
        # scale density ∝ y^{-(α+1)/2} e^{-γ √y}; substitute u = γ √y
        return float(special.gammainc(1.0 - e["alpha"], e["gamma"] * math.sqrt(x0)))
    if params.model_id == "schobel_zhu":
        k, th, g = p["kappa"], p["theta"], p["gamma"]
        alpha = e["alpha"] if measure is Measure.TILDE else k
        if alpha == 0:
            # half line only: scale density ∝ exp(-2κθ y / γ²)
            return float(-math.expm1(-2 * k * th * x0 / g ** 2))
        # scale density ∝ Gaussian with this mean and standard deviation
        mean, sd = k * th / alpha, g / math.sqrt(-2 * alpha)
        z0 = (x0 - mean) / sd
        if params.state_space == "real_line":
            return float(special.ndtr(z0))
        zl = -mean / sd
        return float(-math.expm1(special.log_ndtr(-z0) - special.log_ndtr(-zl)))
    raise AssertionError(f"no two-sided exit for {params.model_id}")


def _exit(params: CanonicalParams, measure: Measure, x0: float) -> ExitBehavior:
    case = feller_exit(analytic_profile(params, measure)).case
    if case is ExitCase.BOTH:
        return ExitBehavior(case, exit_probability(params, measure, x0))
    return ExitBehavior(case)


def direct_verdicts(params: CanonicalParams) -> dict[str, Tri]:
    """Verdicts from inequalities in the derived exponents."""
    e = params.exponents()
    m = params.model_id
    if m == "heston":
        a, g = e["alpha"], e["gamma"]
        out = dict(true_martingale=True, ui_martingale=a < 1 and g >= 0, positive_finite_T=True,
                   positive_at_infinity=a < 1)
    elif m == "three_halves":
        out = dict(true_martingale=e["a_tilde"] >= -1, ui_martingale=False,
                   positive_finite_T=e["a"] >= -1, positive_at_infinity=False)
    elif m == "schobel_zhu":
        half = params.state_space == "half_line"
        out = dict(true_martingale=True, ui_martingale=half and e["alpha"] > 0, positive_finite_T=True,
                   positive_at_infinity=half)
    else:
        a, g = e["alpha"], e["gamma"]
        out = dict(true_martingale=g <= 0, ui_martingale=a < 1 and g <= 0, positive_finite_T=True,
                   positive_at_infinity=a < 1)
    out["absorbed_at_zero"] = not out["positive_at_infinity"]
    return {k: Tri.of(v) for k, v in out.items()}


def analytic_verdicts(params: CanonicalParams, x0: float = 1.0) -> MartingaleReport:
    """Complete closed-form report; every verdict is definite."""
    if params.model_id == "schobel_zhu" and params.state_space == "half_line" and not x0 > 0:
        raise ValueError("the half-line Schöbel-Zhu model needs x0 > 0")
    if params.model_id != "schobel_zhu" and not x0 > 0:
        raise ValueError(f"{params.model_id} needs x0 > 0")
    original = analytic_profile(params, Measure.ORIGINAL)
    tprofile = analytic_profile(params, Measure.TILDE)
    return MartingaleReport(
        source="analytic",
        conditions_ok=Tri.YES,
        exit_original=_exit(params, Measure.ORIGINAL, x0),
        exit_tilde=_exit(params, Measure.TILDE, x0),
        phi_original=phi_perpetual(original),
        phi_tilde=phi_perpetual(tprofile),
        profile_original=original,
        profile_tilde=tprofile,
        exponents=tuple(params.exponents().items()),
        **direct_verdicts(params),
    )


def verdicts_for_spec(spec: DiffusionSpec) -> MartingaleReport:
    return analytic_verdicts(CanonicalParams.from_spec(spec), spec.start)

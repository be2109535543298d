"""Decision rules: exit behaviour, integral-functional verdicts, martingale and positivity.

Every rule is evaluated in three-valued (Kleene) logic over the boundary
profile.  A definite answer is returned only when it holds for every possible
resolution of the Inconclusive fields it reads; otherwise the answer is
Inconclusive and the blocking fields are reported by name.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .model import Check, ConditionReport, DiffusionSpec, b_nontrivial, check_conditions, tilde
from .quad import DEFAULT_POLICY, Finiteness, ProbePolicy
from .scale import BoundaryProfile, Measure, ProfileInconsistency, boundary_profile, scale_function


class Tri(enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"

    @staticmethod
    def of(flag: bool) -> "Tri":
        return Tri.YES if flag else Tri.NO

    @property
    def definite(self) -> bool:
        return self is not Tri.INCONCLUSIVE


def tri_not(x: Tri) -> Tri:
    return {Tri.YES: Tri.NO, Tri.NO: Tri.YES}.get(x, Tri.INCONCLUSIVE)


def tri_and(*xs: Tri) -> Tri:
    if Tri.NO in xs:
        return Tri.NO
    return Tri.INCONCLUSIVE if Tri.INCONCLUSIVE in xs else Tri.YES


def tri_or(*xs: Tri) -> Tri:
    if Tri.YES in xs:
        return Tri.YES
    return Tri.INCONCLUSIVE if Tri.INCONCLUSIVE in xs else Tri.NO


def from_check(c: Check) -> Tri:
    return {Check.HOLDS: Tri.YES, Check.FAILS: Tri.NO}.get(c, Tri.INCONCLUSIVE)


def _inf(f: Finiteness) -> Tri:
    return Tri.of(f.infinite) if f.definite else Tri.INCONCLUSIVE


def _fin(f: Finiteness) -> Tri:
    return Tri.of(f.finite) if f.definite else Tri.INCONCLUSIVE


def _blocking(profile: BoundaryProfile, names: tuple[str, ...]) -> tuple[str, ...]:
    prefix = profile.measure.value
    return tuple(f"{prefix}.{n}" for n in names if not getattr(profile, n).definite)


# ---------------------------------------------------------------------------
# Exit behaviour
# ---------------------------------------------------------------------------


class ExitCase(enum.Enum):
    NO_EXIT = "a"
    LEFT_ONLY = "b"
    RIGHT_ONLY = "c"
    BOTH = "d"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ExitBehavior:
    """Which boundaries ``Y`` can reach, and ``P(exit at r)`` when both can."""

    case: ExitCase
    exit_prob_right: float | None = None

    def __post_init__(self):
        p = self.exit_prob_right
        if p is not None:
            if self.case is not ExitCase.BOTH:
                raise ValueError("an exit probability only accompanies exit at both boundaries")
            # the true value lies in (0, 1) but may round to an endpoint
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"exit probability {p} must lie in [0, 1]")


_EXIT_CASES = {
    (True, True): ExitCase.NO_EXIT,
    (False, True): ExitCase.LEFT_ONLY,
    (True, False): ExitCase.RIGHT_ONLY,
    (False, False): ExitCase.BOTH,
}


def feller_exit(profile: BoundaryProfile, spec: DiffusionSpec | None = None,
                policy: ProbePolicy = DEFAULT_POLICY) -> ExitBehavior:
    """Exit case from the finiteness of ``s`` at both ends.

    In the two-sided case the right-exit probability is
    ``(s(x₀) - s(ℓ)) / (s(r) - s(ℓ))``, i.e. one minus the left-exit
    probability ``(s(r) - s(x₀)) / (s(r) - s(ℓ))``.  It needs ``spec`` (the
    untransformed one; the profile's measure selects the drift) and converged
    boundary limits of ``s``; without them the probability is left empty.
    """
    if not (profile.s_left.definite and profile.s_right.definite):
        return ExitBehavior(ExitCase.INCONCLUSIVE)
    case = _EXIT_CASES[(profile.s_left.infinite, profile.s_right.infinite)]
    if case is not ExitCase.BOTH or spec is None:
        return ExitBehavior(case)
    lo, hi = profile.s_left_limit, profile.s_right_limit
    if lo is None or hi is None:
        return ExitBehavior(case)
    work = tilde(spec) if profile.measure is Measure.TILDE else spec
    s0 = scale_function(work, work.start, policy)
    p = (s0 - lo) / (hi - lo)
    return ExitBehavior(case, p if 0.0 <= p <= 1.0 else None)


# ---------------------------------------------------------------------------
# Integral functionals of b²(Y)
# ---------------------------------------------------------------------------


class PhiVerdict(enum.Enum):
    AS_FINITE = "as_finite"
    AS_INFINITE = "as_infinite"
    MIXED = "mixed"
    INCONCLUSIVE = "inconclusive"


def phi_perpetual(profile: BoundaryProfile) -> PhiVerdict:
    """Finiteness of ``∫_0^ζ b²(Y_u) du``: almost surely finite, almost surely infinite, or mixed.

    Raises :class:`ProfileInconsistency` for profiles that cannot arise
    (``s`` infinite at a boundary where ``v`` or ``v_b`` is finite).
    """
    bad = profile.violations()
    if bad:
        raise ProfileInconsistency("; ".join(bad))
    sl, sr = _inf(profile.s_left), _inf(profile.s_right)
    bl, br = _fin(profile.vb_left), _fin(profile.vb_right)

    finite = tri_or(tri_and(br, sl), tri_and(bl, sr), tri_and(bl, br))
    infinite = tri_and(tri_not(bl), tri_not(br))
    mixed = tri_and(tri_not(sl), tri_not(sr), tri_or(tri_and(bl, tri_not(br)), tri_and(tri_not(bl), br)))

    outcomes = [v for v, t in ((PhiVerdict.AS_FINITE, finite), (PhiVerdict.AS_INFINITE, infinite),
                               (PhiVerdict.MIXED, mixed)) if t is Tri.YES]
    if len(outcomes) > 1:
        raise ProfileInconsistency(f"several verdicts hold at once: {outcomes}")
    if outcomes:
        return outcomes[0]
    if all(t is Tri.NO for t in (finite, infinite, mixed)):
        raise ProfileInconsistency("no verdict holds for a definite profile")
    return PhiVerdict.INCONCLUSIVE


PERPETUAL_FIELDS = ("s_left", "s_right", "vb_left", "vb_right")
CAPPED_FIELDS = ("v_left", "v_right", "vb_left", "vb_right")


def phi_capped(profile: BoundaryProfile) -> Tri:
    """Whether ``∫_0^{ζ∧T} b²(Y_u) du < ∞`` almost surely for every finite ``T``.

    The "yes" route (both ``v`` infinite, or one side with ``v_b`` finite
    paired with the other side's ``v`` infinite, or both ``v_b`` finite) and
    the "no" route (some boundary with ``v`` finite and ``v_b`` infinite) are
    evaluated separately; for a definite profile exactly one of them holds.
    """
    vl, vr = _inf(profile.v_left), _inf(profile.v_right)
    bl, br = _fin(profile.vb_left), _fin(profile.vb_right)
    yes = tri_or(tri_and(vl, vr), tri_and(br, vl), tri_and(bl, vr), tri_and(bl, br))
    no = tri_or(tri_and(tri_not(vl), tri_not(bl)), tri_and(tri_not(vr), tri_not(br)))
    if yes is Tri.YES and no is Tri.YES:
        raise ProfileInconsistency("capped-functional routes disagree")
    if yes is Tri.YES:
        return Tri.YES
    if no is Tri.YES:
        return Tri.NO
    if yes is Tri.NO and no is Tri.NO:
        raise ProfileInconsistency("neither capped-functional route holds for a definite profile")
    return Tri.INCONCLUSIVE


# ---------------------------------------------------------------------------
# Verdicts from profiles
# ---------------------------------------------------------------------------


def martingale_from(tilde_profile: BoundaryProfile) -> Tri:
    return phi_capped(tilde_profile)


def ui_from(tilde_profile: BoundaryProfile, b_nonzero: Tri) -> Tri:
    return positivity_infinite_from(tilde_profile, b_nonzero)


def positivity_finite_from(profile: BoundaryProfile) -> Tri:
    return phi_capped(profile)


def positivity_infinite_from(profile: BoundaryProfile, b_nonzero: Tri) -> Tri:
    """``b`` trivial, or ``v_b`` finite on a side whose opposite ``s`` is infinite, or both ``v_b`` finite."""
    sl, sr = _inf(profile.s_left), _inf(profile.s_right)
    bl, br = _fin(profile.vb_left), _fin(profile.vb_right)
    return tri_or(tri_not(b_nonzero), tri_and(br, sl), tri_and(bl, sr), tri_and(bl, br))


def absorbed_from(profile: BoundaryProfile, b_nonzero: Tri) -> Tri:
    return tri_and(b_nonzero, tri_not(_fin(profile.vb_left)), tri_not(_fin(profile.vb_right)))


def martingale(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY) -> Tri:
    """Whether the price is a true martingale on every finite horizon."""
    return martingale_from(boundary_profile(spec, Measure.TILDE, policy))


def ui_martingale(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY) -> Tri:
    """Whether the price is a uniformly integrable martingale on ``[0, ∞]``."""
    b_nonzero = from_check(b_nontrivial(spec, policy))
    if b_nonzero is Tri.NO:
        return Tri.YES
    return ui_from(boundary_profile(spec, Measure.TILDE, policy), b_nonzero)


def positivity_finite(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY) -> Tri:
    """Whether ``P(S_T > 0) = 1`` for every finite ``T``."""
    return positivity_finite_from(boundary_profile(spec, Measure.ORIGINAL, policy))


def positivity_infinite(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY) -> Tri:
    """Whether ``P(S_∞ > 0) = 1``."""
    b_nonzero = from_check(b_nontrivial(spec, policy))
    if b_nonzero is Tri.NO:
        return Tri.YES
    return positivity_infinite_from(boundary_profile(spec, Measure.ORIGINAL, policy), b_nonzero)


def absorbed_zero(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY) -> Tri:
    """Whether ``S_∞ = 0`` almost surely."""
    b_nonzero = from_check(b_nontrivial(spec, policy))
    if b_nonzero is Tri.NO:
        return Tri.NO
    return absorbed_from(boundary_profile(spec, Measure.ORIGINAL, policy), b_nonzero)


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------

VERDICTS = ("true_martingale", "ui_martingale", "positive_finite_T", "positive_at_infinity", "absorbed_at_zero")


@dataclass(frozen=True)
class MartingaleReport:
    """All verdicts for one model, with the evidence they were derived from.

    ``blocking`` maps each Inconclusive verdict to the profile fields that
    kept it from being definite.  ``analytic`` holds the closed-form report
    for a recognised canonical model, and ``agreement`` flags, per verdict and
    profile field, whether the numeric and closed-form answers coincide.
    """

    source: str
    conditions_ok: Tri
    true_martingale: Tri
    ui_martingale: Tri
    positive_finite_T: Tri
    positive_at_infinity: Tri
    absorbed_at_zero: Tri
    exit_original: ExitBehavior
    exit_tilde: ExitBehavior
    phi_original: PhiVerdict
    phi_tilde: PhiVerdict
    profile_original: BoundaryProfile
    profile_tilde: BoundaryProfile
    b_nontrivial: Tri = Tri.YES
    exponents: tuple[tuple[str, float], ...] = ()
    blocking: tuple[tuple[str, tuple[str, ...]], ...] = ()
    conditions: ConditionReport | None = field(default=None, compare=False)
    analytic: "MartingaleReport | None" = None
    agreement: tuple[tuple[str, bool], ...] = ()

    def verdicts(self) -> dict[str, Tri]:
        return {name: getattr(self, name) for name in VERDICTS}

    @property
    def agrees(self) -> bool:
        return all(ok for _, ok in self.agreement)

    def invariant_violations(self) -> list[str]:
        out = []
        if self.ui_martingale is Tri.YES and self.true_martingale is not Tri.YES:
            out.append("uniformly integrable but not a true martingale")
        if self.absorbed_at_zero is Tri.YES and self.positive_at_infinity is not Tri.NO:
            out.append("absorbed at zero yet not ruled out as positive at infinity")
        if self.positive_at_infinity is Tri.YES and self.absorbed_at_zero is not Tri.NO:
            out.append("positive at infinity yet not ruled out as absorbed at zero")
        for prof in (self.profile_original, self.profile_tilde):
            out.extend(f"{prof.measure.value}: {v}" for v in prof.violations())
        return out


def verdicts_from_profiles(original: BoundaryProfile, tilde_profile: BoundaryProfile,
                           b_nonzero: Tri) -> dict[str, tuple[Tri, tuple[str, ...]]]:
    """Each verdict with the blocking fields that apply when it is Inconclusive."""
    rules = {
        "true_martingale": (martingale_from(tilde_profile), _blocking(tilde_profile, CAPPED_FIELDS)),
        "ui_martingale": (ui_from(tilde_profile, b_nonzero), _blocking(tilde_profile, PERPETUAL_FIELDS)),
        "positive_finite_T": (positivity_finite_from(original), _blocking(original, CAPPED_FIELDS)),
        "positive_at_infinity": (positivity_infinite_from(original, b_nonzero),
                                 _blocking(original, PERPETUAL_FIELDS)),
        "absorbed_at_zero": (absorbed_from(original, b_nonzero), _blocking(original, ("vb_left", "vb_right"))),
    }
    if not b_nonzero.definite:
        rules = {k: (v, blk + ("b_nontrivial",)) for k, (v, blk) in rules.items()}
    return rules


def full_report(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY, conditions: bool = True,
                analytic: bool = True) -> MartingaleReport:
    """Run condition checks, both profiles, both exit analyses and all verdicts.

    With ``analytic`` set and a canonical descriptor on ``spec``, the
    closed-form report is attached and compared field by field.
    """
    cond = check_conditions(spec, policy) if conditions else None
    if cond is not None:
        cond_ok = tri_and(from_check(cond.es_condition), from_check(cond.b_local_integrability))
        b_nonzero = from_check(cond.b_nontrivial)
    else:
        cond_ok = Tri.INCONCLUSIVE
        b_nonzero = from_check(b_nontrivial(spec, policy))

    original = boundary_profile(spec, Measure.ORIGINAL, policy)
    tprofile = boundary_profile(spec, Measure.TILDE, policy)
    rules = verdicts_from_profiles(original, tprofile, b_nonzero)
    blocking = tuple((k, blk) for k, (v, blk) in rules.items() if v is Tri.INCONCLUSIVE)

    oracle = None
    exponents: tuple[tuple[str, float], ...] = ()
    if spec.descriptor is not None:
        from . import analytic as _analytic

        exponents = _analytic.exponents_of(spec)
        if analytic:
            oracle = _analytic.verdicts_for_spec(spec)

    report = MartingaleReport(
        source="numeric",
        conditions_ok=cond_ok,
        exit_original=feller_exit(original, spec, policy),
        exit_tilde=feller_exit(tprofile, spec, policy),
        phi_original=phi_perpetual(original),
        phi_tilde=phi_perpetual(tprofile),
        profile_original=original,
        profile_tilde=tprofile,
        b_nontrivial=b_nonzero,
        exponents=exponents,
        blocking=blocking,
        conditions=cond,
        analytic=oracle,
        **{k: v for k, (v, _) in rules.items()},
    )
    if oracle is not None:
        report = _with_agreement(report, oracle)
    return report


def _with_agreement(report: MartingaleReport, oracle: MartingaleReport) -> MartingaleReport:
    from dataclasses import replace

    flags = [(name, getattr(report, name) == getattr(oracle, name)) for name in VERDICTS]
    for label, num, ana in (("original", report.profile_original, oracle.profile_original),
                            ("tilde", report.profile_tilde, oracle.profile_tilde)):
        for f in BoundaryProfile.FIELDS:
            flags.append((f"{label}.{f}", getattr(num, f).kind == getattr(ana, f).kind))
    for label, num, ana in (("exit_original", report.exit_original, oracle.exit_original),
                            ("exit_tilde", report.exit_tilde, oracle.exit_tilde)):
        flags.append((label, num.case == ana.case))
        if num.exit_prob_right is not None and ana.exit_prob_right is not None:
            flags.append((f"{label}.prob", math.isclose(num.exit_prob_right, ana.exit_prob_right,
                                                        rel_tol=1e-4, abs_tol=1e-6)))
    return replace(report, agreement=tuple(flags))

"""Finite-interval quadrature and finiteness classification of improper integrals.

Two pieces live here.

``integrate`` is a thin wrapper around scipy's tanh-sinh rule.  The
substitution clusters nodes toward the endpoints without ever touching them,
which is what integrable endpoint singularities need.

``classify_improper`` decides whether an integral toward an interval endpoint
converges.  Partial integrals are accumulated over windows that approach the
endpoint geometrically.  The exponential decay rate of the window increments
is then fitted.  A pure power law ``y**p`` at a boundary shows up as a
constant rate in the log-distance variable, so convergence versus divergence
reduces to the sign of that rate.  The same window machinery, run in log
space, backs the scale and test function evaluators in :mod:`svmart.scale`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import tanhsinh

LN2 = math.log(2.0)


class EvaluationError(ValueError):
    """A user function returned a non-finite value at an interior point."""

    def __init__(self, message: str, point: float | None = None):
        super().__init__(message if point is None else f"{message} at x={point!r}")
        self.point = point


class AccuracyError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (best estimate {estimate!r}, error {error!r})")
        self.estimate = estimate
        self.error = error


class Kind(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Finiteness:
    """Tri-state finiteness verdict for an improper integral.

    ``estimate``/``error`` are only attached to a finite verdict when the error
    bound meets the tolerance that was asked for.  ``rate`` is the fitted
    exponential rate of the tail increments per unit of the probe variable
    (positive or zero means the increments are not shrinking).
    """

    kind: Kind
    estimate: float | None = None
    error: float | None = None
    rate: float | None = None

    @property
    def finite(self) -> bool:
        return self.kind is Kind.FINITE

    @property
    def infinite(self) -> bool:
        return self.kind is Kind.INFINITE

    @property
    def definite(self) -> bool:
        return self.kind is not Kind.INCONCLUSIVE

    def symbol(self, side: str = "right", signed: bool = False) -> str:
        """Table notation: ``<∞``/``=∞``, or ``>-∞``/``=-∞`` for a signed left limit."""
        if self.kind is Kind.INCONCLUSIVE:
            return "?"
        if signed and side == "left":
            return ">-∞" if self.finite else "=-∞"
        return "<∞" if self.finite else "=∞"


FINITE = Finiteness(Kind.FINITE)
INFINITE = Finiteness(Kind.INFINITE)
INCONCLUSIVE = Finiteness(Kind.INCONCLUSIVE)


@dataclass(frozen=True)
class ProbePolicy:
    """Knobs for boundary probing.

    Windows ``k = 1..probe_count`` cover ``[(k-1) h, k h]`` in the probe variable
    with ``h = log(ratio)``; the probe points are ``t_k = e + (c - e) / ratio**k``
    for a finite endpoint ``e`` and ``t_k = c ± base_offset * (ratio**k - 1)``
    for an infinite one.

    The verdict is read off the last ``tail_fraction`` of the windows.  A fitted
    increment rate at or above ``infinite_rate`` means the partial integrals keep
    growing (logarithmic divergence sits at rate 0), a rate at or below
    ``finite_rate`` means geometric convergence, anything in between is left
    inconclusive.  Partial integrals growing by more than ``ceiling`` over the
    tail windows are declared infinite outright.  A window sequence cut short
    (see ``classify_tail``) must show a rate at or below ``short_finite_rate``
    to be declared finite.  Increments that decay like a power ``k^-p`` of the
    window index (a sign of logarithmic factors) need ``p`` at least
    ``power_finite_exponent`` to be declared finite.
    """

    probe_count: int = 24
    ratio: float = 2.0
    base_offset: float = 1.0
    tail_fraction: float = 1.0 / 3.0
    infinite_rate: float = -0.008
    finite_rate: float = -0.016
    short_finite_rate: float = -0.25
    power_finite_exponent: float = 2.0
    ceiling: float = 1e12
    tol: float = 1e-9
    nodes: int = 16
    min_panels: int = 2
    max_panels: int = 4096
    max_panel_swing: float = 6.0
    max_log_swing: float = 2.0e4

    def __post_init__(self):
        if self.probe_count < 8:
            raise ValueError("probe_count must be at least 8")
        if not self.ratio > 1.0:
            raise ValueError("ratio must exceed 1")
        if not self.base_offset > 0.0:
            raise ValueError("base_offset must be positive")
        if not 0.0 < self.tail_fraction <= 1.0:
            raise ValueError("tail_fraction must lie in (0, 1]")
        if not self.short_finite_rate <= self.finite_rate < self.infinite_rate < 0.0:
            raise ValueError("need short_finite_rate <= finite_rate < infinite_rate < 0")
        if not self.power_finite_exponent > 1.0:
            raise ValueError("power_finite_exponent must exceed 1")
        if not self.ceiling > 1.0:
            raise ValueError("ceiling must exceed 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.nodes < 4:
            raise ValueError("nodes must be at least 4")

    @property
    def step(self) -> float:
        return math.log(self.ratio)


DEFAULT_POLICY = ProbePolicy()


def integrate(f: Callable, a: float, b: float, tol: float = 1e-9, maxlevel: int = 14) -> tuple[float, float]:
    """Integrate ``f`` over the finite interval ``(a, b)``.

    Returns ``(estimate, error_bound)``.  Raises :class:`EvaluationError` if
    ``f`` is non-finite at a node and :class:`AccuracyError` if the tolerance
    ``tol * max(1, |estimate|)`` cannot be met.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"need finite a < b, got ({a}, {b})")

    def guarded(x):
        y = np.asarray(f(x), dtype=float)
        y = np.array(np.broadcast_to(y, np.shape(x)))
        if not np.all(np.isfinite(y)):
            bad = np.asarray(x)[~np.isfinite(y)]
            raise EvaluationError("integrand is not finite", float(bad.flat[0]))
        return y

    res = tanhsinh(guarded, a, b, atol=0.0, rtol=tol / 4, maxlevel=maxlevel)
    est = float(res.integral)
    err = float(res.error)
    if not res.success or not err <= tol * max(1.0, abs(est)):
        raise AccuracyError("tanh-sinh did not converge", est, err)
    return est, err


# ---------------------------------------------------------------------------
# Chebyshev panels
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _cheb(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev-Lobatto nodes on [-1, 1] and the matrix of indefinite integrals.

    ``Q @ f`` gives ``∫_{-1}^{x_j} p`` at every node, where ``p`` interpolates ``f``.
    """
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    V = C.chebvander(x, n - 1)
    coef_of_values = np.linalg.inv(V)
    integ = np.zeros((n + 1, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        integ[:, j] = C.chebint(e, lbnd=-1.0)
    Q = C.chebvander(x, n) @ integ @ coef_of_values
    Q[0] = 0.0
    return x, Q


def panel_nodes(lo: float, hi: float, panels: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (panels × n) on ``[lo, hi]`` split evenly, plus per-panel half-widths."""
    x, _ = _cheb(n)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    return mid[:, None] + half[:, None] * x[None, :], half


def cumulative_linear(values: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Running integral over consecutive panels, starting from zero at the first node."""
    _, Q = _cheb(values.shape[1])
    within = (values @ Q.T) * half[:, None]
    prefix = np.concatenate([[0.0], np.cumsum(within[:, -1])[:-1]])
    return within + prefix[:, None]


def cumulative_log(logs: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Log of the running integral of ``exp(logs)`` over consecutive panels.

    Each panel is rescaled by its own maximum so that values far outside the
    floating-point range are handled; tiny negative interpolation artifacts are
    clipped and the result forced monotone.
    """
    _, Q = _cheb(logs.shape[1])
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        shift = np.max(logs, axis=1)
        shift = np.where(np.isfinite(shift), shift, 0.0)
        scaled = np.exp(logs - shift[:, None])
        within = (scaled @ Q.T) * half[:, None]
        within = np.maximum.accumulate(np.maximum(within, 0.0), axis=1)
        log_within = np.log(within) + shift[:, None]
        totals = log_within[:, -1]
        prefix = np.concatenate([[-np.inf], np.logaddexp.accumulate(totals)[:-1]])
        return np.logaddexp(prefix[:, None], log_within)


def log_sum(a: float, b: float) -> float:
    return float(np.logaddexp(a, b))


# ---------------------------------------------------------------------------
# Probe paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbePath:
    """Monotone map ``w ↦ y(w)`` from the anchor ``c`` (w = 0) toward a boundary.

    For a finite boundary ``e`` the probe variable is the log-distance
    ``w = log((c - e) / (y - e))``; for an infinite one it is the log-cutoff
    ``w = log(1 + |y - c| / offset)``.
    """

    c: float
    boundary: float
    offset: float

    @property
    def direction(self) -> int:
        return 1 if self.boundary > self.c else -1

    @property
    def finite(self) -> bool:
        return math.isfinite(self.boundary)

    def y(self, w: np.ndarray) -> np.ndarray:
        if self.finite:
            return self.boundary + (self.c - self.boundary) * np.exp(-w)
        return self.c + self.direction * self.offset * np.expm1(w)

    def log_jacobian(self, w: np.ndarray) -> np.ndarray:
        """log |dy/dw|."""
        if self.finite:
            return math.log(abs(self.c - self.boundary)) - w
        return math.log(self.offset) + w

    def w_of(self, x: float) -> float:
        if self.finite:
            return math.log((self.c - self.boundary) / (x - self.boundary))
        return math.log1p(abs(x - self.c) / self.offset)


def make_path(c: float, boundary: float, policy: ProbePolicy) -> ProbePath:
    if boundary == c:
        raise ValueError("boundary coincides with anchor")
    return ProbePath(float(c), float(boundary), policy.base_offset * max(1.0, abs(c)))


# ---------------------------------------------------------------------------
# Tail analysis
# ---------------------------------------------------------------------------


def _fit_rate(w: np.ndarray, d: np.ndarray) -> float:
    if np.any(np.isneginf(d)):
        return -math.inf
    if len(w) < 2:
        return math.nan
    return float(np.polyfit(w, d, 1)[0])


def classify_tail(log_inc: np.ndarray, w_end: np.ndarray, step: float, policy: ProbePolicy,
                  short: bool = False) -> Finiteness:
    """Verdict from the log-increments of consecutive probe windows.

    ``log_inc[k]`` is the log of the integral over window ``k`` and ``w_end[k]``
    its right edge in the probe variable.  ``short`` marks a sequence that
    stopped before the boundary was approached closely, so a slowly creeping
    rate cannot be told apart from a logarithmic divergence; a finite verdict
    then needs a rate at or below ``policy.short_finite_rate``.
    """
    log_inc = np.asarray(log_inc, dtype=float)
    w_end = np.asarray(w_end, dtype=float)
    K = len(log_inc)
    if K < 3:
        return INCONCLUSIVE
    log_partial = np.logaddexp.accumulate(log_inc)
    base = log_inc[0] if np.isfinite(log_inc[0]) else np.max(log_inc)
    if not np.isfinite(base):
        # integrand vanishes on every window
        return Finiteness(Kind.FINITE, 0.0, 0.0, -math.inf)

    m = max(3, int(math.ceil(K * policy.tail_fraction)))
    m = min(m, K)
    # growth over the tail windows alone: a convergent tail adds almost
    # nothing there however large the early partial integrals were
    if log_partial[-1] - log_partial[-m - 1 if m < K else 0] > math.log(policy.ceiling):
        return Finiteness(Kind.INFINITE, rate=_fit_rate(w_end[-m:], log_inc[-m:]))
    tail_w = w_end[-m:] - 0.5 * step
    tail_d = log_inc[-m:]
    rate_fit = _fit_rate(tail_w, tail_d)
    rate_last = (log_inc[-1] - log_inc[-2]) / step if np.isfinite(log_inc[-1]) else -math.inf
    if math.isnan(rate_last):
        rate_last = -math.inf
    rate = _trend_limit(log_inc, step)
    if rate is not None and _band(rate, policy) != _band(rate_last, policy):
        # extrapolating the creep would move the verdict across a band; the
        # windows do not settle the question on their own
        return _settle_divergence(log_inc, rate)
    if rate is None:
        # no clean geometric trend: the fit and the last local rate must agree
        if rate_fit >= policy.infinite_rate and rate_last >= policy.infinite_rate:
            rate = min(rate_fit, rate_last)
        elif rate_fit <= policy.finite_rate and rate_last <= policy.finite_rate:
            rate = max(rate_fit, rate_last)
        else:
            return _settle_divergence(log_inc, rate_fit)

    if rate >= policy.infinite_rate:
        return Finiteness(Kind.INFINITE, rate=rate)
    if rate <= (policy.short_finite_rate if short else policy.finite_rate):
        power = _power_exponent(log_inc)
        if power is not None and power < policy.power_finite_exponent:
            # k^-p increments with p near 1 cannot be told from a divergent
            # logarithmic tail within the probed range
            return Finiteness(Kind.INCONCLUSIVE, rate=rate)
        total = math.exp(log_partial[-1]) if log_partial[-1] < 700 else math.inf
        rate_prev = (log_inc[-2] - log_inc[-3]) / step if np.isfinite(log_inc[-2]) else rate_last
        # the spread of the extrapolated remainders over the recent rates
        # bounds the error of extrapolating with the last one
        tail, spread = _tail_error(log_inc, step, (rate_last, rate, rate_prev))
        estimate = total + tail
        error = spread + 1e-12 * abs(estimate)
        if math.isfinite(estimate) and error <= policy.tol * max(1.0, abs(estimate)):
            return Finiteness(Kind.FINITE, estimate, error, rate)
        return Finiteness(Kind.FINITE, rate=rate)
    return _settle_divergence(log_inc, rate)


def _settle_divergence(log_inc: np.ndarray, rate: float) -> Finiteness:
    """Infinite when the increments visibly settle at a positive level, else inconclusive."""
    level = _increment_limit(log_inc)
    if level is not None and level >= 0.5:
        return Finiteness(Kind.INFINITE, rate=0.0)
    return Finiteness(Kind.INCONCLUSIVE, rate=rate)


def _increment_limit(log_inc: np.ndarray, max_shrink: float = 0.75, max_spread: float = 0.2) -> float | None:
    """Limit of the window increments, relative to the last one, when they approach it geometrically.

    A logarithmic divergence has increments tending to a positive constant,
    while a convergent tail has increments tending to zero.  The limit is read
    off the last four increments by the Aitken extrapolation, which is exact for
    ``I_k = I + B q**k``; it is returned only when both available estimates of
    ``q`` lie in ``(0, max_shrink)`` and differ by at most ``max_spread``.
    """
    if len(log_inc) < 4 or not np.all(np.isfinite(log_inc[-4:])):
        return None
    inc = np.exp(log_inc[-4:] - log_inc[-1])
    d = np.diff(inc)
    if d[0] == 0.0 or d[1] == 0.0:
        return None
    q1, q2 = d[1] / d[0], d[2] / d[1]
    if not (0.0 < q1 < max_shrink and 0.0 < q2 < max_shrink) or abs(q1 - q2) > max_spread:
        return None
    return float(inc[-1] + d[2] * q2 / (1.0 - q2))


def _band(rate: float, policy: ProbePolicy) -> int:
    """-1 for a convergent rate, 1 for a divergent one, 0 in between."""
    if rate >= policy.infinite_rate:
        return 1
    return -1 if rate <= policy.finite_rate else 0


def _trend_limit(log_inc: np.ndarray, step: float, min_change: float = 1e-4,
                 max_shrink: float = 0.75) -> float | None:
    """Limit of the local rates when their last changes shrink geometrically.

    Logarithmic corrections to a power-law tail make the local rate creep
    toward its limit like ``r + A q**k``.  With three local rates available and
    a consistent shrink factor ``q`` in ``(0, max_shrink)`` the remaining creep is summed
    as a geometric series.  Returns ``None`` when no such trend is visible.
    """
    if len(log_inc) < 4 or not np.all(np.isfinite(log_inc[-4:])):
        return None
    r = np.diff(log_inc[-4:]) / step
    d1, d2 = r[1] - r[0], r[2] - r[1]
    if abs(d2) < min_change or d1 == 0.0:
        return None
    q = d2 / d1
    if not 0.0 < q < max_shrink:
        return None
    return float(r[2] + d2 * q / (1.0 - q))


def _remainder(log_last: float, rate: float, step: float) -> float:
    """Geometric extrapolation of the increments beyond the last window."""
    if not np.isfinite(log_last) or rate == -math.inf:
        return 0.0
    if rate >= 0.0:
        return math.inf
    q = math.exp(rate * step)
    return math.exp(log_last) * q / (1.0 - q)


def _power_exponent(log_inc: np.ndarray) -> float | None:
    """Exponent ``p`` when the increments look like ``k^-p`` in the window index, else ``None``.

    Geometric increments have log-increments on a straight line; a power law
    bends them upward.  The tail counts as power-like when the last three
    log-increments bend at least half as much as the power law through the
    last two would.  Such tails come from logarithmic factors in the integrand
    and converge far too slowly for geometric extrapolation.
    """
    k = len(log_inc)
    if k < 4 or not np.all(np.isfinite(log_inc[-3:])):
        return None
    p = (log_inc[-2] - log_inc[-1]) / math.log(k / (k - 1))
    bend = log_inc[-1] - 2.0 * log_inc[-2] + log_inc[-3]
    power_bend = -p * (math.log(k) - 2.0 * math.log(k - 1) + math.log(k - 2))
    return float(p) if p > 0 and bend >= 0.5 * power_bend else None


def _power_remainder(log_inc: np.ndarray) -> float | None:
    """Remainder under a power-law tail, or ``None`` when the tail is not power-like."""
    p = _power_exponent(log_inc)
    if p is None:
        return None
    if not p > 1.0:
        return math.inf
    return math.exp(log_inc[-1]) * len(log_inc) / (p - 1.0)


def _tail_error(log_inc: np.ndarray, step: float, rates: tuple[float, ...]) -> tuple[float, float]:
    """Geometric remainder with the first rate, and an error covering the other rates and a power-law tail."""
    tails = [_remainder(log_inc[-1], r, step) for r in rates]
    power = _power_remainder(log_inc)
    if power is not None:
        tails.append(power)
    return tails[0], max(tails) - min(tails)


def tail_estimate(log_inc: np.ndarray, step: float) -> tuple[float, float]:
    """Extrapolated total ``(value, error)`` of a convergent window sequence.

    Unlike the estimate attached to :class:`Finiteness`, this is returned even
    when the error exceeds the policy tolerance; callers weigh it themselves.
    """
    log_inc = np.asarray(log_inc, dtype=float)
    total = float(np.exp(np.logaddexp.reduce(log_inc)))
    if len(log_inc) < 3 or not np.isfinite(log_inc[-1]):
        return total, 1e-12 * total
    r_last = (log_inc[-1] - log_inc[-2]) / step
    r_prev = (log_inc[-2] - log_inc[-3]) / step
    if not (r_last < 0 and r_prev < 0):
        return total, math.inf
    tail, spread = _tail_error(log_inc, step, (r_last, r_prev))
    return total + tail, spread + 1e-12 * total


# ---------------------------------------------------------------------------
# Generic improper integrals
# ---------------------------------------------------------------------------


def _worst_swing(logs: np.ndarray) -> float:
    """Largest max-minus-min of the finite log values within any panel."""
    finite = np.isfinite(logs)
    if not finite.any():
        return 0.0
    hi = np.where(finite, logs, -np.inf).max(axis=1)
    lo = np.where(finite, logs, np.inf).min(axis=1)
    ok = np.isfinite(hi) & np.isfinite(lo)
    return float((hi[ok] - lo[ok]).max()) if ok.any() else 0.0


def _window_logs(log_f: Callable[[np.ndarray], np.ndarray], path: ProbePath, lo: float, hi: float,
                 policy: ProbePolicy) -> float:
    """Log of ∫ f dy over the window ``[lo, hi]`` of the probe variable, refined until resolved."""
    panels = policy.min_panels
    while True:
        w, half = panel_nodes(lo, hi, panels, policy.nodes)
        lf = log_f(path.y(w)) + path.log_jacobian(w)
        if np.any(np.isposinf(lf)):
            return math.inf
        worst = _worst_swing(lf)
        if worst <= policy.max_panel_swing or panels >= policy.max_panels:
            return float(cumulative_log(lf, half)[-1, -1])
        panels = min(policy.max_panels, int(math.ceil(panels * worst / policy.max_panel_swing)) + 1)


def classify_improper(f: Callable, c: float, boundary: float, policy: ProbePolicy = DEFAULT_POLICY) -> Finiteness:
    """Classify ``∫_c^boundary f(y) dy`` (``f ≥ 0`` near the boundary) as finite or infinite.

    ``boundary`` may be ``±inf``; its side relative to ``c`` picks the direction.
    """

    def log_f(y):
        with np.errstate(over="ignore"):
            vals = np.asarray(f(y), dtype=float)
        vals = np.broadcast_to(vals, np.shape(y))
        if np.any(np.isnan(vals)):
            bad = np.asarray(y)[np.isnan(vals)]
            raise EvaluationError("integrand is NaN", float(bad.flat[0]))
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(vals, 0.0))

    path = make_path(c, boundary, policy)
    h = policy.step
    incs = []
    for k in range(policy.probe_count):
        incs.append(_window_logs(log_f, path, k * h, (k + 1) * h, policy))
        if incs[-1] == math.inf:
            return Finiteness(Kind.INFINITE, rate=math.inf)
    w_end = h * np.arange(1, policy.probe_count + 1)
    return classify_tail(np.array(incs), w_end, h, policy)

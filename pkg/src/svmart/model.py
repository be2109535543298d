"""Model definitions, the four built-in families, and standing-condition checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .quad import AccuracyError, DEFAULT_POLICY, EvaluationError, ProbePolicy, integrate, make_path

Func = Callable[[np.ndarray], np.ndarray]


class Check(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Descriptor:
    """Parametric identity of a built-in model, used by the analytic oracle."""

    model_id: str
    params: tuple[tuple[str, float], ...]
    state_space: str | None = None

    def get(self, name: str) -> float:
        return dict(self.params)[name]

    def as_dict(self) -> dict[str, float]:
        return dict(self.params)


@dataclass(frozen=True)
class DiffusionSpec:
    """Scalar diffusion ``dY = drift(Y) dt + diffusion(Y) dW`` on ``interval``.

    ``exponent`` is the volatility function ``b`` of the log-price; the price
    is driven by ``ρ W + sqrt(1 - ρ²) W'`` with ``ρ = correlation``.  All three
    callables must accept and return numpy arrays.
    """

    drift: Func
    diffusion: Func
    exponent: Func
    interval: tuple[float, float]
    start: float
    correlation: float = 0.0
    reference_point: float | None = None
    descriptor: Descriptor | None = field(default=None, compare=False)

    def __post_init__(self):
        lo, hi = (float(v) for v in self.interval)
        object.__setattr__(self, "interval", (lo, hi))
        if math.isnan(lo) or math.isnan(hi) or not lo < hi or lo == math.inf or hi == -math.inf:
            raise ValueError(f"interval must satisfy left < right, got {self.interval}")
        if not lo < self.start < hi:
            raise ValueError(f"start {self.start} must lie strictly inside {self.interval}")
        if not -1.0 <= self.correlation <= 1.0:
            raise ValueError(f"correlation {self.correlation} must lie in [-1, 1]")
        if self.reference_point is not None and not lo < self.reference_point < hi:
            raise ValueError(f"reference point {self.reference_point} must lie strictly inside {self.interval}")

    @property
    def left(self) -> float:
        return self.interval[0]

    @property
    def right(self) -> float:
        return self.interval[1]

    @property
    def c(self) -> float:
        return self.start if self.reference_point is None else float(self.reference_point)

    def mu(self, x) -> np.ndarray:
        return _evaluate(self.drift, x, "drift")

    def sigma(self, x) -> np.ndarray:
        return _evaluate(self.diffusion, x, "diffusion")

    def b(self, x) -> np.ndarray:
        return _evaluate(self.exponent, x, "exponent")

    def with_reference(self, c: float) -> "DiffusionSpec":
        return replace(self, reference_point=float(c))


def _evaluate(func: Func, x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = np.asarray(func(x), dtype=float)
    out = np.array(np.broadcast_to(out, x.shape))
    if not np.all(np.isfinite(out)):
        bad = x[~np.isfinite(out)]
        raise EvaluationError(f"{name} is not finite", float(bad.flat[0]))
    return out


def tilde(spec: DiffusionSpec) -> DiffusionSpec:
    """The same diffusion with drift ``μ + ρ b σ``: the law of Y under the auxiliary measure."""
    rho = spec.correlation
    mu, sig, b = spec.drift, spec.diffusion, spec.exponent

    def drift(x):
        return mu(x) + rho * b(x) * sig(x)

    return replace(spec, drift=drift)


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

_PARAMS = {
    "heston": ("kappa", "theta", "xi", "rho"),
    "three_halves": ("omega", "theta", "xi", "rho"),
    "schobel_zhu": ("kappa", "theta", "gamma", "rho"),
    "hull_white": ("mu", "sigma", "rho"),
}

MODEL_IDS = tuple(_PARAMS)


def model_parameters(model_id: str) -> tuple[str, ...]:
    try:
        return _PARAMS[model_id]
    except KeyError:
        raise ValueError(f"unknown model {model_id!r}; expected one of {', '.join(MODEL_IDS)}") from None


def _positive(params: Mapping[str, float], *names: str) -> None:
    for n in names:
        if not params[n] > 0:
            raise ValueError(f"{n} must be positive, got {params[n]}")


def builtin(model_id: str, params: Mapping[str, float], x0: float = 1.0,
            reference_point: float | None = None, state_space: str | None = None) -> DiffusionSpec:
    """Spec for one of the canonical stochastic-volatility families.

    ``state_space`` only matters for ``schobel_zhu``: ``"real_line"`` (default)
    is the Ornstein-Uhlenbeck volatility on the whole line; ``"half_line"``
    stops it at zero, which is the setting its classification tables describe.
    """
    names = model_parameters(model_id)
    missing = [n for n in names if n not in params]
    extra = [n for n in params if n not in names]
    if missing or extra:
        raise ValueError(f"{model_id} takes parameters {names}; missing {missing}, unexpected {extra}")
    p = {n: float(params[n]) for n in names}
    if not -1.0 <= p["rho"] <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {p['rho']}")
    if state_space is not None and model_id != "schobel_zhu":
        raise ValueError("state_space only applies to schobel_zhu")

    if model_id == "heston":
        _positive(p, "kappa", "theta", "xi")
        k, th, xi = p["kappa"], p["theta"], p["xi"]
        drift = lambda x: k * (th - x)
        diffusion = lambda x: xi * np.sqrt(x)
        exponent = np.sqrt
        interval = (0.0, math.inf)
    elif model_id == "three_halves":
        _positive(p, "omega", "xi")
        om, th, xi = p["omega"], p["theta"], p["xi"]
        drift = lambda x: om * x - th * x * x
        diffusion = lambda x: xi * x ** 1.5
        exponent = np.sqrt
        interval = (0.0, math.inf)
    elif model_id == "schobel_zhu":
        _positive(p, "kappa", "theta", "gamma")
        k, th, g = p["kappa"], p["theta"], p["gamma"]
        drift = lambda x: k * (th - x)
        diffusion = lambda x: np.full_like(x, g)
        exponent = lambda x: x
        space = state_space or "real_line"
        if space == "real_line":
            interval = (-math.inf, math.inf)
        elif space == "half_line":
            interval = (0.0, math.inf)
        else:
            raise ValueError(f"state_space must be real_line or half_line, got {space!r}")
    else:
        _positive(p, "mu", "sigma")
        m, s = p["mu"], p["sigma"]
        drift = lambda x: m * x
        diffusion = lambda x: s * x
        exponent = np.sqrt
        interval = (0.0, math.inf)

    params_t = tuple((n, p[n]) for n in names)
    space = ("half_line" if interval[0] == 0.0 else "real_line") if model_id == "schobel_zhu" else None
    return DiffusionSpec(drift, diffusion, exponent, interval, float(x0), p["rho"],
                         reference_point, Descriptor(model_id, params_t, space))


# ---------------------------------------------------------------------------
# Standing conditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    lower: float
    upper: float
    integrand: str
    estimate: float


@dataclass(frozen=True)
class ConditionReport:
    es_condition: Check
    b_local_integrability: Check
    b_nontrivial: Check
    witnesses: tuple[Witness, ...] = ()

    @property
    def all_hold(self) -> bool:
        return all(c is Check.HOLDS for c in (self.es_condition, self.b_local_integrability, self.b_nontrivial))


INTEGRANDS = ("1/sigma^2", "mu/sigma^2", "b^2/sigma^2")


def ladder(spec: DiffusionSpec, rungs: int, policy: ProbePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Sorted points ``a_rungs < … < a_1 < c < b_1 < … < b_rungs`` inside the state interval."""
    c = spec.c
    h = policy.step
    w = h * np.arange(1, rungs + 1)
    left = make_path(c, spec.left, policy).y(w)
    right = make_path(c, spec.right, policy).y(w)
    return np.concatenate([left[::-1], [c], right])


def check_conditions(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY, rungs: int = 12,
                     samples: int = 64) -> ConditionReport:
    """Evidence for local integrability of ``1/σ²``, ``μ/σ²``, ``b²/σ²`` and for ``b ≢ 0``.

    Integrals are taken over a ladder of compact intervals growing toward both
    boundaries.  A zero or sign change of ``σ`` between sample points counts as
    divergence inside the interval.  A "holds" verdict is numerical evidence on
    the sampled ladder, not a proof.
    """
    pts = ladder(spec, rungs, policy)
    witnesses: list[Witness] = []
    status = {name: Check.HOLDS for name in INTEGRANDS}

    # dense sampling of every ladder segment, endpoints included
    t = np.linspace(0.0, 1.0, samples)
    grid = np.unique((pts[:-1, None] + np.diff(pts)[:, None] * t[None, :]).ravel())
    sig = spec.sigma(grid)
    b2 = spec.b(grid) ** 2
    spec.mu(grid)
    zero = np.flatnonzero(sig == 0.0)
    flips = np.flatnonzero(np.sign(sig[:-1]) * np.sign(sig[1:]) < 0)
    if zero.size or flips.size:
        if zero.size:
            lo = hi = float(grid[zero[0]])
        else:
            lo, hi = float(grid[flips[0]]), float(grid[flips[0] + 1])
        for name in INTEGRANDS:
            status[name] = Check.FAILS
            witnesses.append(Witness(lo, hi, name, math.inf))
        es = Check.FAILS
        return ConditionReport(es, Check.FAILS, _nontrivial(b2), tuple(witnesses))

    funcs = {
        "1/sigma^2": lambda x: 1.0 / spec.sigma(x) ** 2,
        "mu/sigma^2": lambda x: np.abs(spec.mu(x)) / spec.sigma(x) ** 2,
        "b^2/sigma^2": lambda x: spec.b(x) ** 2 / spec.sigma(x) ** 2,
    }
    mid = rungs  # index of c in pts
    for name, g in funcs.items():
        pieces = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            try:
                val, _ = integrate(g, lo, hi, tol=1e-8)
            except EvaluationError:
                status[name] = Check.FAILS
                val = math.inf
            except AccuracyError as exc:
                val = exc.estimate
                if not math.isfinite(val) or exc.error > 1e-3 * max(1.0, abs(val)):
                    if status[name] is Check.HOLDS:
                        status[name] = Check.INCONCLUSIVE
            if not math.isfinite(val):
                status[name] = Check.FAILS
            pieces.append(val)
        pieces = np.array(pieces)
        for k in range(1, rungs + 1):
            total = float(pieces[mid - k:mid + k].sum())
            witnesses.append(Witness(float(pts[mid - k]), float(pts[mid + k]), name, total))

    es = _worst(status["1/sigma^2"], status["mu/sigma^2"])
    return ConditionReport(es, status["b^2/sigma^2"], _nontrivial(b2), tuple(witnesses))


def b_nontrivial(spec: DiffusionSpec, policy: ProbePolicy = DEFAULT_POLICY, rungs: int = 12,
                 samples: int = 64) -> Check:
    """Whether ``b²`` is strictly positive somewhere on the sampled ladder.

    Sampling cannot see a positive-measure set that falls between grid
    points, so a "fails" answer is evidence that ``b`` vanishes, not proof.
    """
    pts = ladder(spec, rungs, policy)
    t = np.linspace(0.0, 1.0, samples)
    grid = (pts[:-1, None] + np.diff(pts)[:, None] * t[None, :]).ravel()
    return _nontrivial(spec.b(grid) ** 2)


def _nontrivial(b2: np.ndarray) -> Check:
    return Check.HOLDS if np.any(b2 > 0.0) else Check.FAILS


def _worst(*checks: Check) -> Check:
    if Check.FAILS in checks:
        return Check.FAILS
    if Check.INCONCLUSIVE in checks:
        return Check.INCONCLUSIVE
    return Check.HOLDS

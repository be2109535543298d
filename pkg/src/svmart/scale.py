"""Scale function, test functions ``v`` and ``v_b``, and boundary profiles.

With ``L(y) = -∫_c^y 2μ/σ²`` the scale density is ``s'(y) = exp(L(y))`` and the
two speed-type weights are ``m(y) = 2 exp(-L(y)) / σ²(y)`` and ``m_b = m b²``.
The test functions are evaluated in the swapped form

    v(x) = ∫_c^x s'(z) M(z) dz,        M(z) = ∫_c^z m(y) dy,

(with orientation flipped on the left of ``c`` so that every running integral
is nonnegative), which equals ``∫_c^x (s(x) - s(y)) m(y) dy`` by Fubini.  All
running integrals are carried in log space on the probe windows of
:mod:`svmart.quad`, so the huge dynamic range of ``exp(±L)`` never overflows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import DiffusionSpec, tilde
from .quad import (DEFAULT_POLICY, Finiteness, Kind, ProbePolicy, classify_tail, cumulative_linear,
                   cumulative_log, integrate, make_path, panel_nodes, tail_estimate)


# relative error below which a boundary limit of s is reported
LIMIT_TOL = 1e-6


class Measure(enum.Enum):
    ORIGINAL = "original"
    TILDE = "tilde"


class ProfileInconsistency(RuntimeError):
    """Boundary classifications contradict the implication s = ∞ ⇒ v = v_b = ∞."""


@dataclass(frozen=True)
class BoundaryProfile:
    """Finiteness of ``s``, ``v``, ``v_b`` at both ends of the state interval.

    ``s_left`` finite means ``s(ℓ) > -∞`` and ``s_right`` finite means
    ``s(r) < ∞``.  ``s_left_limit``/``s_right_limit`` hold the signed limits of
    ``s`` (normalised by ``s(c) = 0``) when those are finite and were computed.
    """

    measure: Measure
    s_left: Finiteness
    s_right: Finiteness
    v_left: Finiteness
    v_right: Finiteness
    vb_left: Finiteness
    vb_right: Finiteness
    s_left_limit: float | None = None
    s_right_limit: float | None = None

    FIELDS = ("s_left", "s_right", "v_left", "v_right", "vb_left", "vb_right")

    def kinds(self) -> tuple[Kind, ...]:
        return tuple(getattr(self, f).kind for f in self.FIELDS)

    def same_kinds(self, other: "BoundaryProfile") -> bool:
        return self.kinds() == other.kinds()

    def inconclusive_fields(self) -> list[str]:
        return [f for f in self.FIELDS if not getattr(self, f).definite]

    def violations(self) -> list[str]:
        """Fields breaking ``s`` infinite ⇒ ``v`` and ``v_b`` infinite."""
        out = []
        for side in ("left", "right"):
            s = getattr(self, f"s_{side}")
            if s.infinite:
                for name in ("v", "vb"):
                    if getattr(self, f"{name}_{side}").finite:
                        out.append(f"{name}_{side} finite while s_{side} infinite")
        return out


@dataclass
class _Trace:
    w_end: np.ndarray
    log_s: np.ndarray
    log_v: np.ndarray
    log_vb: np.ndarray
    truncated: bool


def _trace(spec: DiffusionSpec, boundary: float, edges: np.ndarray, policy: ProbePolicy,
           allow_truncation: bool = True) -> _Trace:
    """Window-by-window log-increments of ``s``, ``v`` and ``v_b`` from ``c`` toward ``boundary``."""
    path = make_path(spec.c, boundary, policy)
    sign = path.direction
    n = policy.nodes
    L0 = 0.0
    logM = logMb = -math.inf
    out_s, out_v, out_vb, w_end = [], [], [], []
    truncated = False

    for lo, hi in zip(edges[:-1], edges[1:]):
        panels = policy.min_panels
        while True:
            w, half = panel_nodes(lo, hi, panels, n)
            y = path.y(w)
            lj = path.log_jacobian(w)
            mu, sg, b = spec.mu(y), spec.sigma(y), spec.b(y)
            sg2 = sg * sg
            with np.errstate(over="ignore"):
                g = -sign * 2.0 * mu / sg2 * np.exp(lj)
            if not np.all(np.isfinite(g)):
                # the drift-to-variance ratio overflows: the scale density is
                # beyond any representable range, so stop probing here
                truncated = True
                break
            L = L0 + cumulative_linear(g, half)
            swing = float(np.max(L.max(axis=1) - L.min(axis=1)))
            if swing <= policy.max_panel_swing:
                break
            if panels >= policy.max_panels:
                # the window cannot be resolved within the panel budget; its
                # increment would be inaccurate, so the trace ends before it
                truncated = True
                break
            panels = min(policy.max_panels, int(math.ceil(panels * swing / policy.max_panel_swing)) + 1)
        if truncated:
            break

        with np.errstate(divide="ignore"):
            log_2_sg2 = np.log(2.0 / sg2)
            log_b2 = np.log(b * b)
        log_sp = L + lj
        cs = cumulative_log(log_sp, half)
        cm = np.logaddexp(logM, cumulative_log(-L + log_2_sg2 + lj, half))
        cmb = np.logaddexp(logMb, cumulative_log(-L + log_2_sg2 + log_b2 + lj, half))
        cv = cumulative_log(log_sp + cm, half)
        cvb = cumulative_log(log_sp + cmb, half)

        out_s.append(cs[-1, -1])
        out_v.append(cv[-1, -1])
        out_vb.append(cvb[-1, -1])
        w_end.append(hi)
        L0 = float(L[-1, -1])
        logM = float(cm[-1, -1])
        logMb = float(cmb[-1, -1])
        if allow_truncation and np.max(np.abs(L)) > policy.max_log_swing:
            truncated = True
            break

    return _Trace(np.array(w_end), np.array(out_s), np.array(out_v), np.array(out_vb), truncated)


def _probe_edges(policy: ProbePolicy) -> np.ndarray:
    return policy.step * np.arange(policy.probe_count + 1)


def _point_edges(path_w: float, policy: ProbePolicy) -> np.ndarray:
    k = max(1, int(math.ceil(path_w / policy.step)))
    return np.linspace(0.0, path_w, k + 1)


def _side_trace(spec: DiffusionSpec, x: float, policy: ProbePolicy) -> tuple[_Trace, int]:
    boundary = spec.right if x > spec.c else spec.left
    path = make_path(spec.c, boundary, policy)
    tr = _trace(spec, boundary, _point_edges(path.w_of(x), policy), policy, allow_truncation=False)
    return tr, path.direction


def _total(log_inc: np.ndarray) -> float:
    return float(np.exp(np.logaddexp.reduce(log_inc))) if len(log_inc) else 0.0


def scale_density(spec: DiffusionSpec, x: float, tol: float = 1e-10) -> float:
    """``s'(x) = exp(-∫_c^x 2μ/σ²)``, with the inner integral by tanh-sinh quadrature."""
    c = spec.c
    if x == c:
        return 1.0
    lo, hi = (c, x) if x > c else (x, c)
    val, _ = integrate(lambda y: 2.0 * spec.mu(y) / spec.sigma(y) ** 2, lo, hi, tol)
    return math.exp(-val if x > c else val)


def scale_function(spec: DiffusionSpec, x: float, policy: ProbePolicy = DEFAULT_POLICY) -> float:
    """``s(x) = ∫_c^x s'(y) dy`` (so ``s(c) = 0``)."""
    if x == spec.c:
        return 0.0
    _check_inside(spec, x)
    tr, direction = _side_trace(spec, x, policy)
    return direction * _total(tr.log_s)


def test_functions(spec: DiffusionSpec, x: float, policy: ProbePolicy = DEFAULT_POLICY) -> tuple[float, float]:
    """``(v(x), v_b(x))``, evaluated through the swapped double-integral form."""
    if x == spec.c:
        return 0.0, 0.0
    _check_inside(spec, x)
    tr, _ = _side_trace(spec, x, policy)
    return _total(tr.log_v), _total(tr.log_vb)


# keep pytest from collecting the public function above as a test
test_functions.__test__ = False


def _check_inside(spec: DiffusionSpec, x: float) -> None:
    if not spec.left < x < spec.right:
        raise ValueError(f"x={x} lies outside the state interval {spec.interval}")


def boundary_profile(spec: DiffusionSpec, measure: Measure = Measure.ORIGINAL,
                     policy: ProbePolicy = DEFAULT_POLICY, check: bool = True) -> BoundaryProfile:
    """Classify ``s``, ``v`` and ``v_b`` at both boundaries under ``measure``.

    ``v`` and ``v_b`` are classified through the probed values ``v(t_k)`` as
    ``t_k`` approaches the boundary.  With ``check`` set, a profile violating
    ``s = ∞ ⇒ v = v_b = ∞`` raises :class:`ProfileInconsistency`.
    """
    work = tilde(spec) if measure is Measure.TILDE else spec
    edges = _probe_edges(policy)
    fields: dict[str, Finiteness] = {}
    limits: dict[str, float | None] = {}
    for side, boundary, sign in (("left", work.left, -1.0), ("right", work.right, 1.0)):
        tr = _trace(work, boundary, edges, policy)
        for name, logs in (("s", tr.log_s), ("v", tr.log_v), ("vb", tr.log_vb)):
            fields[f"{name}_{side}"] = classify_tail(logs, tr.w_end, policy.step, policy, short=tr.truncated)
        limit = None
        if fields[f"s_{side}"].finite:
            value, err = tail_estimate(tr.log_s, policy.step)
            if err <= LIMIT_TOL * max(1.0, abs(value)):
                limit = sign * value
        limits[side] = limit
    profile = BoundaryProfile(measure, s_left_limit=limits["left"], s_right_limit=limits["right"], **fields)
    if check:
        bad = profile.violations()
        if bad:
            raise ProfileInconsistency("; ".join(bad))
    return profile

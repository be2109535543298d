"""Monte Carlo simulation of ``(Y, log Z, φ)`` with absorption at inner barriers.

The volatility factor is stepped with Euler (or Milstein on ``Y``) using full
truncation: coefficients are evaluated at the state clipped into the barrier
interval.  Between grid points a Brownian-bridge test decides whether a path
crossed a barrier it did not land beyond, which removes the leading
``O(√Δt)`` bias of discretely monitored exit.  After absorption, capping or a
non-finite update a path is frozen: ``Y``, ``log Z`` and ``φ`` stay constant.

Alongside ``log Z`` each path carries ``log Z^ρ``, the log of the stochastic
exponential of ``ρ ∫ b dW`` alone.  Since ``b(Y)`` is driven by ``W`` only,
``Z^ρ_T = E[Z_T | W]`` whenever ``φ_T < ∞``, so averaging ``Z^ρ_T`` estimates
``E[Z_T]`` without the noise of the independent Brownian factor.

Paths are simulated in fixed-size blocks.  Block ``k`` draws from the ``k``-th
child of ``SeedSequence(seed)``, and blocks are merged in block order, so the
output does not depend on how many worker threads share the blocks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .model import DiffusionSpec, tilde
from .scale import Measure, boundary_profile, scale_function


class Scheme(enum.Enum):
    EULER = "euler"
    MILSTEIN = "milstein"


class Status(enum.IntEnum):
    SURVIVED = 0
    ABSORBED_LEFT = 1
    ABSORBED_RIGHT = 2
    CAPPED = 3


@dataclass(frozen=True)
class McConfig:
    """Simulation settings.

    ``barriers`` overrides the default inner barriers.  By default a finite
    boundary ``e`` gets the barrier ``e ± barrier_eps`` with
    ``barrier_eps = 1e-6 · max(1, |x₀|)``, and an infinite boundary gets
    ``±y_cap``, whose crossing counts as capping rather than absorption.
    """

    path_count: int = 10_000
    dt: float = 1e-3
    horizon: float = 1.0
    seed: int = 0
    barriers: tuple[float, float] | None = None
    barrier_eps: float | None = None
    y_cap: float = 1e9
    phi_cap: float = 1e9
    scheme: Scheme = Scheme.EULER
    workers: int = 1
    block_size: int = 10_000
    bridge: bool = True
    measure: Measure = Measure.ORIGINAL
    low_confidence_fraction: float = 0.01
    conditional: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.path_count < 1:
            raise ValueError(f"path_count must be at least 1, got {self.path_count}")
        if self.workers < 1 or self.block_size < 1:
            raise ValueError("workers and block_size must be at least 1")
        if not (self.y_cap > 0 and self.phi_cap > 0):
            raise ValueError("caps must be positive")
        if self.barrier_eps is not None and not self.barrier_eps > 0:
            raise ValueError("barrier_eps must be positive")
        if not 0 <= self.low_confidence_fraction <= 1:
            raise ValueError("low_confidence_fraction must lie in [0, 1]")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "measure", Measure(self.measure))

    @property
    def steps(self) -> int:
        return max(1, int(math.ceil(self.horizon / self.dt - 1e-9)))

    def resolve_barriers(self, spec: DiffusionSpec) -> tuple[float, float]:
        if self.barriers is not None:
            lo, hi = (float(v) for v in self.barriers)
            if not spec.left <= lo < spec.start < hi <= spec.right:
                raise ValueError(f"barriers {self.barriers} must bracket x0={spec.start} inside {spec.interval}")
            return lo, hi
        eps = self.barrier_eps if self.barrier_eps is not None else 1e-6 * max(1.0, abs(spec.start))
        lo = spec.left + eps if math.isfinite(spec.left) else -self.y_cap
        hi = spec.right - eps if math.isfinite(spec.right) else self.y_cap
        if not lo < spec.start < hi:
            raise ValueError(f"x0={spec.start} does not lie strictly between the barriers ({lo}, {hi})")
        return lo, hi


@dataclass(frozen=True)
class Tallies:
    absorbed_left: int = 0
    absorbed_right: int = 0
    capped: int = 0
    survived: int = 0

    @property
    def total(self) -> int:
        return self.absorbed_left + self.absorbed_right + self.capped + self.survived

    @classmethod
    def of(cls, status: np.ndarray) -> "Tallies":
        counts = np.bincount(status, minlength=len(Status))
        return cls(absorbed_left=int(counts[Status.ABSORBED_LEFT]), absorbed_right=int(counts[Status.ABSORBED_RIGHT]),
                   capped=int(counts[Status.CAPPED]), survived=int(counts[Status.SURVIVED]))


@dataclass(frozen=True)
class McEstimate:
    """A sample mean with its standard error and the path outcome tallies."""

    label: str
    mean: float
    stderr: float
    path_count: int
    tallies: Tallies
    low_confidence: bool = False
    notes: tuple[str, ...] = ()
    reference: float | None = None

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr


@dataclass
class PathBlock:
    """Terminal state of one block of paths (column arrays of equal length)."""

    y: np.ndarray
    log_z: np.ndarray
    log_z_cond: np.ndarray
    phi: np.ndarray
    status: np.ndarray
    exit_step: np.ndarray


@dataclass(frozen=True)
class PhiSummary:
    """Empirical distribution of ``φ`` at ``ζ ∧ T`` (capped paths report the cap)."""

    horizon: float
    quantiles: tuple[tuple[float, float], ...]
    cap_fraction: float
    cap_stderr: float
    tallies: Tallies
    path_count: int = field(default=0)


QUANTILE_LEVELS = (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99)


def _coefficients(spec: DiffusionSpec, measure: Measure):
    work = tilde(spec) if measure is Measure.TILDE else spec
    return work.drift, work.diffusion, work.exponent


def _raw(func, x: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        return np.broadcast_to(np.asarray(func(x), dtype=float), x.shape)


def _simulate_block(spec: DiffusionSpec, cfg: McConfig, lo: float, hi: float, n: int,
                    seed: np.random.SeedSequence) -> PathBlock:
    rng = np.random.Generator(np.random.PCG64(seed))
    drift, diffusion, exponent = _coefficients(spec, cfg.measure)
    rho = spec.correlation
    rho_c = math.sqrt(max(0.0, 1.0 - rho * rho))
    dt, sq = cfg.dt, math.sqrt(cfg.dt)
    finite_lo = math.isfinite(spec.left) or cfg.barriers is not None
    finite_hi = math.isfinite(spec.right) or cfg.barriers is not None
    milstein = cfg.scheme is Scheme.MILSTEIN

    y_out = np.full(n, float(spec.start))
    lz_out = np.zeros(n)
    lzc_out = np.zeros(n)
    phi_out = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    exit_step = np.full(n, cfg.steps, dtype=np.int64)

    idx = np.arange(n)
    y = y_out.copy()
    lz = np.zeros(n)
    lzc = np.zeros(n)
    phi = np.zeros(n)

    for step in range(cfg.steps):
        m = idx.size
        if m == 0:
            break
        z = rng.standard_normal((2, m))
        u = rng.random((2, m)) if cfg.bridge else None
        ye = np.clip(y, lo, hi)
        mu, sg, b = _raw(drift, ye), _raw(diffusion, ye), _raw(exponent, ye)
        dw = sq * z[0]
        dw1 = rho * dw + rho_c * sq * z[1]
        with np.errstate(all="ignore"):
            y_new = y + mu * dt + sg * dw
            if milstein:
                h = 1e-6 * np.maximum(1.0, np.abs(ye))
                dsg = (_raw(diffusion, np.clip(ye + h, lo, hi)) - _raw(diffusion, np.clip(ye - h, lo, hi))) / (
                    np.clip(ye + h, lo, hi) - np.clip(ye - h, lo, hi))
                y_new = y_new + 0.5 * sg * dsg * (dw * dw - dt)
            b2 = b * b
            lz_new = lz + b * dw1 - 0.5 * b2 * dt
            lzc_new = lzc + rho * b * dw - 0.5 * rho * rho * b2 * dt
            phi_new = phi + b2 * dt

        bad = ~(np.isfinite(y_new) & np.isfinite(lz_new) & np.isfinite(lzc_new) & np.isfinite(phi_new))
        capped = bad | (np.abs(y_new) > cfg.y_cap) | (phi_new > cfg.phi_cap)
        left = ~capped & (y_new <= lo)
        right = ~capped & (y_new >= hi)
        if cfg.bridge:
            var = sg * sg * dt
            with np.errstate(all="ignore"):
                if finite_lo:
                    p_lo = np.exp(-2.0 * (y - lo) * (y_new - lo) / var)
                    left |= ~capped & ~right & (u[0] < p_lo)
                if finite_hi:
                    p_hi = np.exp(-2.0 * (hi - y) * (hi - y_new) / var)
                    right |= ~capped & ~left & (u[1] < p_hi)
        if not finite_lo:
            capped |= left
            left[:] = False
        if not finite_hi:
            capped |= right
            right[:] = False

        y = np.where(left, lo, np.where(right, hi, y_new))
        lz = np.where(capped, lz, lz_new)
        lzc = np.where(capped, lzc, lzc_new)
        phi = np.where(capped, phi, phi_new)
        if np.any(capped):
            # keep the last finite state of a capped path
            y = np.where(capped, ye, y)
            phi = np.where(capped & (phi_new > cfg.phi_cap) & ~bad, cfg.phi_cap, phi)

        done = capped | left | right
        if np.any(done):
            out = idx[done]
            y_out[out] = y[done]
            lz_out[out] = lz[done]
            lzc_out[out] = lzc[done]
            phi_out[out] = phi[done]
            status[out] = np.where(capped[done], Status.CAPPED,
                                   np.where(left[done], Status.ABSORBED_LEFT, Status.ABSORBED_RIGHT))
            exit_step[out] = step + 1
            keep = ~done
            idx, y, lz, lzc, phi = idx[keep], y[keep], lz[keep], lzc[keep], phi[keep]

    y_out[idx] = y
    lz_out[idx] = lz
    lzc_out[idx] = lzc
    phi_out[idx] = phi
    return PathBlock(y_out, lz_out, lzc_out, phi_out, status, exit_step)


def _block_sizes(cfg: McConfig) -> list[int]:
    full, rest = divmod(cfg.path_count, cfg.block_size)
    return [cfg.block_size] * full + ([rest] if rest else [])


def simulate_paths(spec: DiffusionSpec, cfg: McConfig) -> Iterator[PathBlock]:
    """Yield simulated blocks in block order (deterministic for a given seed)."""
    lo, hi = cfg.resolve_barriers(spec)
    sizes = _block_sizes(cfg)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    if cfg.workers == 1:
        for n, s in zip(sizes, seeds):
            yield _simulate_block(spec, cfg, lo, hi, n, s)
        return
    with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
        futures = [ex.submit(_simulate_block, spec, cfg, lo, hi, n, s) for n, s in zip(sizes, seeds)]
        for f in futures:
            yield f.result()


def collect(blocks) -> PathBlock:
    blocks = list(blocks)
    return PathBlock(*(np.concatenate([getattr(b, name) for b in blocks])
                       for name in DUMP_COLUMNS))


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    n = x.size
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return mean, se


def estimate_EZ(spec: DiffusionSpec, horizon: float, cfg: McConfig = McConfig()) -> McEstimate:
    """Sample mean of ``Z_T`` under the original measure.

    With ``cfg.conditional`` (the default) the sample is ``Z^ρ_T = E[Z_T | W]``,
    otherwise ``Z_T`` itself.  Absorbed paths contribute the value frozen at
    absorption; capped paths contribute their last finite value and count
    towards the low-confidence threshold.
    """
    cfg = replace(cfg, horizon=horizon, measure=Measure.ORIGINAL)
    paths = collect(simulate_paths(spec, cfg))
    z = np.exp(paths.log_z_cond if cfg.conditional else paths.log_z)
    mean, se = _mean_se(z)
    tallies = Tallies.of(paths.status)
    capped = tallies.capped / tallies.total
    notes = ()
    if capped > cfg.low_confidence_fraction:
        notes = (f"capped fraction {capped:.4g} exceeds {cfg.low_confidence_fraction:.4g}",)
    return McEstimate("E[Z_T]", mean, se, tallies.total, tallies, bool(notes), notes)


def scale_exit_probability(spec: DiffusionSpec, lo: float, hi: float, measure: Measure = Measure.ORIGINAL) -> float:
    """``P(hit hi before lo)`` from the scale function: ``(s(x₀) - s(lo)) / (s(hi) - s(lo))``."""
    work = tilde(spec) if measure is Measure.TILDE else spec
    work = work.with_reference(work.start)
    s_lo, s_hi = _scale_at(work, lo), _scale_at(work, hi)
    return (0.0 - s_lo) / (s_hi - s_lo)


def _scale_at(spec: DiffusionSpec, x: float) -> float:
    """``s(x)``, taking the converged boundary limit when ``x`` is an endpoint of the interval."""
    if spec.left < x < spec.right:
        return scale_function(spec, x)
    if x not in spec.interval:
        raise ValueError(f"x={x} lies outside the state interval {spec.interval}")
    profile = boundary_profile(spec, check=False)
    limit = profile.s_left_limit if x == spec.left else profile.s_right_limit
    if limit is None:
        raise ValueError(f"the scale function has no finite limit at the endpoint {x}")
    return limit


def estimate_exit(spec: DiffusionSpec, barriers: tuple[float, float], cfg: McConfig = McConfig()) -> McEstimate:
    """Frequency of leaving ``barriers`` through the upper one, among absorbed paths.

    Paths still inside at the horizon are reported in the tallies and a note;
    ``reference`` carries the scale-function ratio for the same barriers.
    """
    lo, hi = (float(v) for v in barriers)
    if not (math.isfinite(lo) and math.isfinite(hi) and spec.left <= lo < spec.start < hi <= spec.right):
        raise ValueError(f"barriers {barriers} must be finite, lie in {spec.interval} and bracket x0={spec.start}")
    cfg = replace(cfg, barriers=(lo, hi))
    paths = collect(simulate_paths(spec, cfg))
    tallies = Tallies.of(paths.status)
    absorbed = tallies.absorbed_left + tallies.absorbed_right
    if absorbed == 0:
        p, se = math.nan, math.inf
    else:
        p = tallies.absorbed_right / absorbed
        se = math.sqrt(max(p * (1 - p), 1.0 / absorbed) / absorbed)
    notes = []
    if tallies.survived:
        notes.append(f"{tallies.survived} paths had not exited by T={cfg.horizon}; frequency uses absorbed paths only")
    if tallies.capped:
        notes.append(f"{tallies.capped} paths were capped")
    try:
        reference = scale_exit_probability(spec, lo, hi, cfg.measure)
    except ValueError:
        reference = None
    low = tallies.capped / tallies.total > cfg.low_confidence_fraction
    return McEstimate("P(exit right)", p, se, tallies.total, tallies, low, tuple(notes), reference)


def estimate_phi(spec: DiffusionSpec, cfg: McConfig = McConfig()) -> PhiSummary:
    """Quantiles of ``φ_{ζ∧T}`` and the fraction of paths whose ``φ`` reached the cap."""
    paths = collect(simulate_paths(spec, cfg))
    tallies = Tallies.of(paths.status)
    hit = paths.phi >= cfg.phi_cap
    frac = float(np.mean(hit))
    n = paths.phi.size
    se = math.sqrt(max(frac * (1 - frac), 1.0 / n) / n)
    qs = np.quantile(paths.phi, QUANTILE_LEVELS)
    return PhiSummary(cfg.horizon, tuple(zip(QUANTILE_LEVELS, map(float, qs))), frac, se, tallies, n)


DUMP_COLUMNS = ("y", "log_z", "log_z_cond", "phi", "status", "exit_step")


def dump_paths(paths: PathBlock, path: str | Path, cfg: McConfig) -> None:
    """Write terminal path columns and the run settings to an ``.npz`` archive."""
    meta = {
        "dt": cfg.dt, "horizon": cfg.horizon, "seed": cfg.seed, "path_count": cfg.path_count,
        "scheme": cfg.scheme.value, "measure": cfg.measure.value, "block_size": cfg.block_size,
        "conditional": cfg.conditional,
    }
    np.savez(path, **{c: getattr(paths, c) for c in DUMP_COLUMNS},
             meta_keys=np.array(list(meta)), meta_values=np.array([str(v) for v in meta.values()]))


def load_paths(path: str | Path) -> tuple[PathBlock, dict[str, str]]:
    with np.load(path) as data:
        block = PathBlock(*(data[c] for c in DUMP_COLUMNS))
        meta = dict(zip(data["meta_keys"].tolist(), data["meta_values"].tolist()))
    return block, meta

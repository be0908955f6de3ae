"""Replicated Monte Carlo: survival probabilities, grid sweeps, threshold bisection."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import RunConfig, run
from .errors import BracketError, InvalidSpecError
from .metrics import outbreak_stats, resilience

AXES = ("tau", "j_local", "w_global", "mu")
# +1: survival grows with the parameter, -1: it shrinks
ORIENTATION = {"tau": +1, "j_local": -1, "w_global": -1}


@dataclass(frozen=True)
class SweepSpec:
    base: RunConfig
    axis: str
    grid: tuple = ()
    bracket: tuple | None = None
    replicates: int = 20
    survival_horizon: int = 2000
    bisection_tolerance: float = 0.005

    def __post_init__(self):
        if self.axis not in AXES:
            raise InvalidSpecError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.replicates < 1:
            raise InvalidSpecError("replicates must be >= 1")
        if self.survival_horizon < 1:
            raise InvalidSpecError("survival_horizon must be >= 1")
        if not self.bisection_tolerance > 0:
            raise InvalidSpecError("bisection_tolerance must be > 0")
        if self.bracket is not None:
            lo, hi = self.bracket
            if not lo < hi:
                raise InvalidSpecError("bracket requires lo < hi")

    def config_at(self, value):
        return self.base.with_params(**{self.axis: float(value)})


@dataclass(frozen=True)
class ThresholdEstimate:
    axis: str
    estimate: float
    bracket_final: tuple
    survival_lo: float
    survival_hi: float
    replicates_used: int
    iterations: int = 0
    history: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class SweepRow:
    value: float
    survival: float
    mean_resilience: float
    mean_peak: float
    mean_eradication_time: float


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def survival_outcomes(config, replicates, horizon, replicate_offset=0, backend=None, workers=1):
    """Per-replicate flags ``N(horizon) > 0`` for replicates offset..offset+replicates-1."""
    if replicates < 1:
        raise InvalidSpecError("replicates must be >= 1")
    cfg = replace(config, control_time=horizon, stop_on_eradication=True)
    idx = range(replicate_offset, replicate_offset + replicates)
    return _map(lambda r: run(cfg, r, backend).eradication_time is None, idx, workers)


def survival_probability(config, replicates, horizon, replicate_offset=0, backend=None, workers=1):
    """Fraction of replicates still infected at ``horizon``."""
    flags = survival_outcomes(config, replicates, horizon, replicate_offset, backend, workers)
    return sum(flags) / len(flags)


def _survives(s):
    return s >= 0.5


def bisection_iterations(lo, hi, tol):
    return max(0, math.ceil(math.log2((hi - lo) / tol)))


def estimate_threshold(spec: SweepSpec, backend=None, workers=1) -> ThresholdEstimate:
    """Bisect the 50% survival crossing along ``spec.axis`` within ``spec.bracket``.

    Every bracket point reuses replicate streams 0..replicates-1, so the
    comparison between points is made with common random numbers.
    """
    if spec.bracket is None:
        raise InvalidSpecError("estimate_threshold needs a bracket")
    if spec.axis not in ORIENTATION:
        raise InvalidSpecError(f"no survival orientation defined for axis {spec.axis!r}")
    sign = ORIENTATION[spec.axis]
    history = []

    def surv(v):
        s = survival_probability(spec.config_at(v), spec.replicates, spec.survival_horizon,
                                 backend=backend, workers=workers)
        history.append((float(v), s))
        return s

    lo, hi = map(float, spec.bracket)
    s_lo, s_hi = surv(lo), surv(hi)
    # the "upper" side in survival terms is hi for increasing axes, lo otherwise
    ok = (not _survives(s_lo) and _survives(s_hi)) if sign > 0 else (_survives(s_lo) and not _survives(s_hi))
    if not ok:
        raise BracketError(spec.axis, lo, hi, s_lo, s_hi)
    iterations = 0
    while hi - lo > spec.bisection_tolerance:
        mid = 0.5 * (lo + hi)
        s = surv(mid)
        if _survives(s) == (sign > 0):
            hi, s_hi = mid, s
        else:
            lo, s_lo = mid, s
        iterations += 1
    return ThresholdEstimate(
        axis=spec.axis,
        estimate=0.5 * (lo + hi),
        bracket_final=(lo, hi),
        survival_lo=s_lo,
        survival_hi=s_hi,
        replicates_used=spec.replicates,
        iterations=iterations,
        history=tuple(history),
    )


def sweep(spec: SweepSpec, backend=None, workers=1):
    """One aggregated row per grid value; replicates share streams across rows."""
    if not spec.grid:
        raise InvalidSpecError("sweep grid is empty")
    horizon = spec.survival_horizon
    rows = []
    for value in spec.grid:
        cfg = spec.config_at(value)
        T = max(cfg.control_time, horizon)
        long_cfg = replace(cfg, control_time=T, stop_on_eradication=True)
        records = _map(lambda r: run(long_cfg, r, backend), range(spec.replicates), workers)
        alive = [rec.eradication_time is None or rec.eradication_time > horizon for rec in records]
        res = [resilience(rec, cfg.control_time) for rec in records]
        peaks = [outbreak_stats(rec)["peak_infected"] for rec in records]
        erad = [rec.eradication_time for rec in records if rec.eradication_time is not None]
        rows.append(SweepRow(
            value=float(value),
            survival=sum(alive) / len(alive),
            mean_resilience=float(np.mean(res)),
            mean_peak=float(np.mean(peaks)),
            mean_eradication_time=float(np.mean(erad)) if erad else float("nan"),
        ))
    return rows

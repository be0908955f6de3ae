"""Critical functionality, resilience and outbreak statistics of a run."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRecordError, MissingSeriesError


@dataclass(frozen=True)
class ResilienceReport:
    resilience: float
    mean_cf: float
    peak_infected: int
    peak_time: int
    eradication_time: int | None
    outbreak_count: int
    cost: float
    node_count: int
    control_time: int
    seed: int

    def combined_score(self, cost_weight=0.0):
        """``R - weight * cost``; weight 0 reproduces plain resilience."""
        return self.resilience - cost_weight * self.cost

    def to_dict(self):
        return {
            "resilience": self.resilience,
            "mean_cf": self.mean_cf,
            "peak_infected": self.peak_infected,
            "peak_time": self.peak_time,
            "eradication_time": self.eradication_time,
            "outbreak_count": self.outbreak_count,
            "cost": self.cost,
            "node_count": self.node_count,
            "control_time": self.control_time,
            "seed": self.seed,
        }


def critical_functionality(infected_count, node_count):
    """Active fraction ``1 - infected/total``."""
    if node_count <= 0:
        raise ValueError("node_count must be positive")
    if not 0 <= infected_count <= node_count:
        raise ValueError("infected_count out of [0, node_count]")
    return 1.0 - infected_count / node_count


def cf_series(record, control_time=None):
    """CF(t) for t = 0..control_time, padded with 1 past an early eradication."""
    if len(record) == 0:
        raise EmptyRecordError("record has no steps")
    T = record.control_time if control_time is None else control_time
    if T < 1:
        raise ValueError("control_time must be >= 1")
    n = np.zeros(T + 1, dtype=np.int64)
    m = min(len(record), T + 1)
    n[:m] = record.infected[:m]
    if m < T + 1 and record.eradication_time is None:
        raise EmptyRecordError(f"record ends at step {len(record) - 1} before control time {T} without eradication")
    return 1.0 - n / record.node_count


def resilience(record, control_time=None):
    """Left-sum time average of CF over the T_C + 1 samples t = 0..T_C."""
    return float(np.mean(cf_series(record, control_time)))


def countermeasure_cost(record):
    """Time average of ``1 - mean_effective_tau`` over the recorded steps."""
    series = getattr(record, "mean_effective_tau", None)
    if series is None:
        raise MissingSeriesError("record has no mean_effective_tau series")
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise EmptyRecordError("record has no steps")
    if np.any(np.isnan(series)):
        raise MissingSeriesError("mean_effective_tau series has gaps")
    return float(np.mean(1.0 - series))


def count_outbreaks(series, noise_floor):
    """Strict local maxima above ``noise_floor``, plateaus collapsed to one point."""
    x = np.asarray(series)
    if x.size == 0:
        return 0
    keep = np.ones(x.size, dtype=bool)
    keep[1:] = x[1:] != x[:-1]
    x = x[keep]
    left = np.concatenate([[-np.inf], x[:-1]])
    right = np.concatenate([x[1:], [-np.inf]])
    return int(np.count_nonzero((x > left) & (x > right) & (x > noise_floor)))


def default_noise_floor(node_count):
    return 0.005 * node_count


def outbreak_stats(record, noise_floor=None):
    """Peak, peak time, eradication time and outbreak count."""
    x = np.asarray(record.infected)
    if x.size == 0:
        raise EmptyRecordError("record has no steps")
    floor = default_noise_floor(record.node_count) if noise_floor is None else noise_floor
    if floor < 0:
        raise ValueError("noise_floor must be non-negative")
    peak_time = int(np.argmax(x))
    erad = record.eradication_time
    if erad is None:
        hits = np.flatnonzero(x == 0)
        erad = int(hits[0]) if hits.size else None
    return {
        "peak_infected": int(x[peak_time]),
        "peak_time": peak_time,
        "eradication_time": erad,
        "outbreak_count": count_outbreaks(x, floor),
    }


def report(record, control_time=None, noise_floor=None) -> ResilienceReport:
    T = record.control_time if control_time is None else control_time
    r = resilience(record, T)
    stats = outbreak_stats(record, noise_floor)
    return ResilienceReport(
        resilience=r,
        mean_cf=r,
        cost=countermeasure_cost(record),
        node_count=record.node_count,
        control_time=T,
        seed=record.master_seed,
        **stats,
    )

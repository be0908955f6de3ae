"""Synchronous SIS dynamics with local and global (memory) risk perception.

One transition t -> t+1:

* every node recovers;
* a node with ``n`` infected neighbors at time t is infected at t+1 with
  probability ``1 - (1 - tau_eff)**n`` where
  ``tau_eff = tau * exp(-J*n - omega(t))``;
* the alarm relaxes as ``omega(t+1) = (1-mu)*omega(t) + mu*W*N(t)``.

Infections at t -> t+1 see ``omega(t)``; the alarm therefore lags the
infected count by one step. Randomness comes from counter-based streams
keyed by ``(master_seed, replicate)`` so a run is bitwise reproducible
and both kernel backends agree exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from ._accel import resolve_backend
from ._rng import TAG_SEEDING, TAG_STEP, stream_key, subkey, uniforms
from .errors import InvalidSpecError
from .topology import Topology


@dataclass(frozen=True)
class PerceptionParams:
    tau: float
    j_local: float = 0.0
    w_global: float = 0.0
    mu: float = 1.0
    omega0: float = 0.0
    normalize_global: bool = False

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise InvalidSpecError("tau out of [0,1]")
        if not self.j_local >= 0.0:
            raise InvalidSpecError("j_local must be non-negative")
        if not self.w_global >= 0.0:
            raise InvalidSpecError("w_global must be non-negative")
        if not 0.0 < self.mu <= 1.0:
            raise InvalidSpecError("mu out of (0,1]")
        if not self.omega0 >= 0.0:
            raise InvalidSpecError("omega0 must be non-negative")


SEEDING_MODES = ("single_node", "exact_count", "fraction")


@dataclass(frozen=True)
class SeedingSpec:
    mode: str = "fraction"
    value: float = 0.1

    def __post_init__(self):
        if self.mode not in SEEDING_MODES:
            raise InvalidSpecError(f"seeding mode must be one of {SEEDING_MODES}, got {self.mode!r}")
        if self.mode == "fraction" and not 0.0 < self.value <= 1.0:
            raise InvalidSpecError("seeding fraction out of (0,1]")
        if self.mode == "exact_count" and self.value < 1:
            raise InvalidSpecError("exact_count seeding needs at least one node")

    def count(self, node_count):
        if self.mode == "single_node":
            k = 1
        elif self.mode == "exact_count":
            k = int(math.floor(self.value))
        else:
            k = int(math.floor(self.value * node_count + 0.5))
        if not 1 <= k <= node_count:
            raise InvalidSpecError(f"seeding would infect {k} of {node_count} nodes")
        return k


@dataclass
class SimState:
    """State at time ``t``. ``key`` is the replicate stream; draws are indexed by (t, node)."""

    t: int
    states: np.ndarray
    infected_count: int
    omega: float
    key: int
    new_infections: int = 0
    mean_effective_tau: float = float("nan")

    @classmethod
    def from_states(cls, states, omega=0.0, key=0, t=0):
        s = np.asarray(states, dtype=np.int8).copy()
        if np.any((s != 0) & (s != 1)):
            raise InvalidSpecError("node states must be 0 or 1")
        n = int(s.sum())
        return cls(t=t, states=s, infected_count=n, omega=float(omega), key=key, new_infections=n)


@dataclass(frozen=True)
class RunConfig:
    topology: Topology
    params: PerceptionParams
    seeding: SeedingSpec = SeedingSpec()
    control_time: int = 1000
    master_seed: int = 0
    stop_on_eradication: bool = True

    def __post_init__(self):
        if self.control_time < 1:
            raise InvalidSpecError("control_time must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidSpecError("master_seed must be a 64-bit unsigned integer")

    def with_params(self, **changes):
        return replace(self, params=replace(self.params, **changes))


@dataclass
class RunRecord:
    """Per-step series of one replicate; row ``t`` describes the state at time ``t``.

    ``new_infections[t]`` counts nodes infected at t but healthy at t-1 and
    ``mean_effective_tau[t]`` averages tau_eff over the exposed nodes of the
    transition into t. Row 0 holds the seeded count and the unexposed
    baseline ``tau*exp(-omega0)``.
    """

    infected: np.ndarray
    omega: np.ndarray
    new_infections: np.ndarray
    mean_effective_tau: np.ndarray
    node_count: int
    control_time: int
    master_seed: int = 0
    replicate: int = 0
    eradication_time: int | None = None
    config: RunConfig | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return int(self.infected.size)

    @property
    def t(self):
        return np.arange(len(self), dtype=np.int64)

    def infected_at(self, t):
        """N(t), with zero past the end of a run stopped at eradication."""
        if t < len(self):
            return int(self.infected[t])
        if self.eradication_time is not None:
            return 0
        raise IndexError(f"step {t} beyond recorded series of length {len(self)}")


def effective_tau(params: PerceptionParams, n_infected_neighbors, omega):
    """``tau * exp(-J*n - omega)`` clamped to [0, 1]."""
    x = params.tau * math.exp(-(params.j_local * n_infected_neighbors) - omega)
    return min(1.0, max(0.0, x))


def infection_probability(effective_tau, n_infected_neighbors):
    """Chance that at least one of ``n`` independent contacts transmits."""
    if n_infected_neighbors <= 0:
        return 0.0
    return 1.0 - (1.0 - effective_tau) ** n_infected_neighbors


def alarm_signal(params: PerceptionParams, infected_count, node_count=None):
    if params.normalize_global:
        if not node_count:
            raise InvalidSpecError("normalize_global requires node_count")
        return params.w_global * (infected_count / node_count)
    return params.w_global * infected_count


def update_perception(params: PerceptionParams, omega, infected_count, node_count=None):
    """Exponentially smoothed alarm: ``(1-mu)*omega + mu*W*N``."""
    return (1.0 - params.mu) * omega + params.mu * alarm_signal(params, infected_count, node_count)


def _tables(params, omega, kmax):
    eff = np.empty(kmax + 1)
    prob = np.empty(kmax + 1)
    for k in range(kmax + 1):
        e = effective_tau(params, k, omega)
        eff[k] = e
        prob[k] = infection_probability(e, k)
    return eff, prob


def seed_infection(topology: Topology, seeding: SeedingSpec, key, omega0=0.0) -> SimState:
    """Infect an exact number of distinct, uniformly chosen nodes.

    Node ``i`` gets draw ``i`` of the seeding sub-stream; the ``k`` nodes
    with the smallest draws are infected.
    """
    n = topology.node_count
    k = seeding.count(n)
    u = uniforms(subkey(key, TAG_SEEDING), np.arange(n, dtype=np.uint64))
    chosen = np.argsort(u, kind="stable")[:k]
    states = np.zeros(n, dtype=np.int8)
    states[chosen] = 1
    return SimState(t=0, states=states, infected_count=k, omega=float(omega0), key=key, new_infections=k)


class _Stepper:
    """Preallocated buffers for repeated steps on one topology."""

    def __init__(self, topology, backend):
        self.topology = topology
        self.backend = resolve_backend(backend)
        self.kmax = max(topology.max_degree, 0)
        self.hist = np.zeros(self.kmax + 1, dtype=np.int64)
        if self.backend == "numpy":
            self.rows = np.repeat(np.arange(topology.node_count, dtype=np.int64), topology.degrees)

    def __call__(self, state: SimState, params: PerceptionParams) -> SimState:
        topo = self.topology
        n = topo.node_count
        eff, prob = _tables(params, state.omega, self.kmax)
        key = subkey(state.key, TAG_STEP)
        base = state.t * n
        out = np.empty(n, dtype=np.int8)
        if self.backend == "numba":
            infected, new = _kernels.step_numba(topo.indptr, topo.indices, state.states, prob, key, base, out, self.hist)
        else:
            infected, new = _kernels.step_numpy(self.rows, topo.indices, state.states, prob, key, base, out, self.hist)
        exposed = 0
        tau_sum = 0.0
        for k in range(1, self.kmax + 1):
            h = int(self.hist[k])
            if h:
                exposed += h
                tau_sum += h * eff[k]
        mean_tau = tau_sum / exposed if exposed else float(eff[0])
        omega = update_perception(params, state.omega, state.infected_count, n)
        return SimState(
            t=state.t + 1,
            states=out,
            infected_count=infected,
            omega=omega,
            key=state.key,
            new_infections=new,
            mean_effective_tau=mean_tau,
        )


def step(state: SimState, topology: Topology, params: PerceptionParams, backend=None) -> SimState:
    """Advance one synchronous step. ``state`` is not modified."""
    return _Stepper(topology, backend)(state, params)


def run(config: RunConfig, replicate=0, backend=None, initial_state=None) -> RunRecord:
    """Seed and iterate until ``control_time`` (or eradication if requested)."""
    topo, params = config.topology, config.params
    key = stream_key(config.master_seed, replicate)
    if initial_state is None:
        state = seed_infection(topo, config.seeding, key, params.omega0)
    else:
        state = replace(initial_state, key=key)
    stepper = _Stepper(topo, backend)
    T = config.control_time
    infected = np.zeros(T + 1, dtype=np.int64)
    omega = np.zeros(T + 1)
    new = np.zeros(T + 1, dtype=np.int64)
    mtau = np.zeros(T + 1)
    infected[0] = state.infected_count
    omega[0] = state.omega
    new[0] = state.new_infections
    mtau[0] = effective_tau(params, 0, state.omega)
    eradication = 0 if state.infected_count == 0 else None
    length = T + 1
    if eradication is not None and config.stop_on_eradication:
        length = 1
    else:
        for t in range(1, T + 1):
            state = stepper(state, params)
            infected[t] = state.infected_count
            omega[t] = state.omega
            new[t] = state.new_infections
            mtau[t] = state.mean_effective_tau
            if state.infected_count == 0 and eradication is None:
                eradication = t
                if config.stop_on_eradication:
                    length = t + 1
                    break
    return RunRecord(
        infected=infected[:length],
        omega=omega[:length],
        new_infections=new[:length],
        mean_effective_tau=mtau[:length],
        node_count=topo.node_count,
        control_time=T,
        master_seed=config.master_seed,
        replicate=replicate,
        eradication_time=eradication,
        config=config,
    )

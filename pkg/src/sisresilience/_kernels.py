"""Per-step SIS update kernels.

``step_numba`` and ``step_numpy`` share one contract and produce identical
output for identical input:

    counts[i] = number of infected neighbors of node i at time t
    node i is exposed iff counts[i] > 0
    exposed node i draws u = uniform(key, base + i) and is infected at t+1
    iff u < prob[counts[i]]; unexposed nodes are healthy at t+1

``hist[k]`` receives the number of exposed nodes with exactly k infected
neighbors. Return value is ``(infected, newly_infected)`` at t+1.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit
from ._rng import uniform_nb, uniforms


@njit(cache=True, nogil=True)
def _step_numba(indptr, indices, state, prob, key, base, out, hist):
    n = state.shape[0]
    hist[:] = 0
    infected = 0
    new = 0
    for i in range(n):
        c = 0
        for p in range(indptr[i], indptr[i + 1]):
            c += state[indices[p]]
        s = 0
        if c > 0:
            hist[c] += 1
            if uniform_nb(key, base + np.uint64(i)) < prob[c]:
                s = 1
        out[i] = s
        if s == 1:
            infected += 1
            if state[i] == 0:
                new += 1
    return infected, new


def step_numpy(rows, indices, state, prob, key, base, out, hist):
    n = state.shape[0]
    counts = np.bincount(rows, weights=state[indices], minlength=n).astype(np.int64)
    exposed = np.flatnonzero(counts)
    c = counts[exposed]
    hist[:] = np.bincount(c, minlength=hist.shape[0])[: hist.shape[0]]
    u = uniforms(key, np.uint64(base) + exposed.astype(np.uint64))
    hit = exposed[u < prob[c]]
    out[:] = 0
    out[hit] = 1
    return int(hit.size), int(np.count_nonzero(state[hit] == 0))


def step_numba(indptr, indices, state, prob, key, base, out, hist):
    infected, new = _step_numba(indptr, indices, state, prob, np.uint64(key), np.uint64(base), out, hist)
    return int(infected), int(new)


__all__ = ["HAVE_NUMBA", "step_numba", "step_numpy"]

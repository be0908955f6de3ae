"""Contact graphs: Moore lattices, preferential-attachment graphs, edge lists.

Graphs are stored in CSR form (``indptr``/``indices``) with each neighbor
list sorted ascending. Construction enforces symmetry, so queries never
re-check it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateGraphError, InvalidSpecError

MOORE_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class LatticeSpec:
    width: int
    height: int
    boundary: str = "periodic"

    def validate(self):
        if self.boundary not in ("periodic", "open"):
            raise InvalidSpecError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")
        if self.width < 1 or self.height < 1:
            raise InvalidSpecError("lattice dimensions must be positive")
        if self.width * self.height < 2:
            raise InvalidSpecError("lattice needs at least 2 cells")
        if self.boundary == "periodic" and (self.width < 3 or self.height < 3):
            raise InvalidSpecError("periodic lattice requires width >= 3 and height >= 3")


@dataclass(frozen=True)
class ScaleFreeSpec:
    node_count: int
    edges_per_node: int
    seed: int = 0

    def validate(self):
        if self.node_count < 1 or self.edges_per_node < 1:
            raise InvalidSpecError("node_count and edges_per_node must be positive")
        if self.edges_per_node >= self.node_count:
            raise InvalidSpecError("edges_per_node must be smaller than node_count")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpecError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class DegreeStats:
    mean_degree: float
    mean_square_degree: float
    min_degree: int
    max_degree: int


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable undirected graph in CSR layout."""

    node_count: int
    indptr: np.ndarray
    indices: np.ndarray
    kind: str = "custom"
    _degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        deg = np.diff(self.indptr)
        deg.setflags(write=False)
        object.__setattr__(self, "_degrees", deg)

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def degrees(self):
        return self._degrees

    @property
    def max_degree(self):
        return int(self._degrees.max()) if self.node_count else 0

    @property
    def edge_count(self):
        return int(self.indices.size // 2)

    def edges(self):
        """Undirected edges as an ``(m, 2)`` array with ``i < j``."""
        rows = np.repeat(np.arange(self.node_count, dtype=np.int64), self._degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def check_invariants(self):
        """Exhaustively verify symmetry, absence of self-loops and of duplicate entries."""
        n = self.node_count
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise AssertionError("malformed CSR index pointer")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= n):
            raise AssertionError("neighbor index out of range")
        rows = np.repeat(np.arange(n, dtype=np.int64), self._degrees)
        if np.any(rows == self.indices):
            raise AssertionError("self-loop present")
        keys = rows * n + self.indices
        if np.unique(keys).size != keys.size:
            raise AssertionError("duplicate neighbor entry")
        mirrored = np.sort(self.indices * n + rows)
        if not np.array_equal(np.sort(keys), mirrored):
            raise AssertionError("adjacency is not symmetric")

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.kind == other.kind
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


def from_edges(node_count, edges, kind="custom", *, allow_duplicates=False):
    """Build a topology from undirected ``(i, j)`` pairs.

    Self-loops are rejected. Repeated pairs (in either orientation) are
    rejected unless ``allow_duplicates``, in which case they collapse.
    """
    if node_count < 1:
        raise InvalidSpecError("node_count must be positive")
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size and (e.min() < 0 or e.max() >= node_count):
        raise InvalidSpecError("edge endpoint out of range")
    if np.any(e[:, 0] == e[:, 1]):
        raise InvalidSpecError("self-loops are not allowed")
    lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
    keys = np.unique(lo * node_count + hi)
    if keys.size != len(e) and not allow_duplicates:
        raise InvalidSpecError("duplicate edges are not allowed")
    lo, hi = keys // node_count, keys % node_count
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(node_count + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=node_count), out=indptr[1:])
    return Topology(node_count, indptr, dst.astype(np.int64), kind)


def build_lattice(spec: LatticeSpec) -> Topology:
    """Square lattice with 8-cell Moore neighborhoods, nodes numbered row-major."""
    spec.validate()
    w, h = spec.width, spec.height
    rows, cols = np.divmod(np.arange(w * h, dtype=np.int64), w)
    src_parts, dst_parts = [], []
    for dr, dc in MOORE_OFFSETS:
        r2, c2 = rows + dr, cols + dc
        if spec.boundary == "periodic":
            r2 %= h
            c2 %= w
            ok = np.ones(w * h, dtype=bool)
        else:
            ok = (r2 >= 0) & (r2 < h) & (c2 >= 0) & (c2 < w)
        src_parts.append((rows * w + cols)[ok])
        dst_parts.append((r2 * w + c2)[ok])
    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    # 3-wide periodic axes fold +1 and -1 onto distinct cells, so no pair repeats
    keep = src < dst
    return from_edges(w * h, np.column_stack([src[keep], dst[keep]]), "lattice", allow_duplicates=True)


def build_scale_free(spec: ScaleFreeSpec) -> Topology:
    """Preferential attachment starting from a clique of ``edges_per_node + 1`` nodes.

    Each later node attaches ``edges_per_node`` edges to distinct existing
    nodes, drawn with probability proportional to current degree. Draws
    come from an endpoint pool (each node appears once per incident edge),
    rejecting repeats, which is sequential degree-proportional sampling
    without replacement.
    """
    spec.validate()
    n, m = spec.node_count, spec.edges_per_node
    rng = np.random.default_rng(spec.seed)
    m0 = m + 1
    edges = [(i, j) for i in range(m0) for j in range(i + 1, m0)]
    pool = np.empty(2 * (len(edges) + m * (n - m0)), dtype=np.int64)
    size = 0
    for i, j in edges:
        pool[size], pool[size + 1] = i, j
        size += 2
    for new in range(m0, n):
        chosen = []
        while len(chosen) < m:
            t = int(pool[rng.integers(size)])
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            edges.append((t, new))
            pool[size], pool[size + 1] = t, new
            size += 2
    return from_edges(n, edges, "scale_free")


def load_edge_list(path, node_count=None) -> Topology:
    """Read ``i j`` pairs (0-based, whitespace separated, ``#`` comments)."""
    pairs = []
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidSpecError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InvalidSpecError(f"{path}:{lineno}: non-integer node index in {line!r}") from None
    if node_count is None:
        node_count = 1 + max((max(p) for p in pairs), default=-1)
    return from_edges(node_count, pairs, "custom")


def degree_stats(t: Topology) -> DegreeStats:
    deg = t.degrees.astype(np.int64)
    # integer sums keep the moments exact up to the final division
    return DegreeStats(
        mean_degree=int(deg.sum()) / t.node_count,
        mean_square_degree=int((deg * deg).sum()) / t.node_count,
        min_degree=int(deg.min()),
        max_degree=int(deg.max()),
    )


def mean_field_threshold(stats: DegreeStats) -> float:
    """Mean-field epidemic onset ``<k> / <k^2>``."""
    if stats.mean_square_degree <= 0:
        raise DegenerateGraphError("graph has no edges; mean-field threshold undefined")
    return stats.mean_degree / stats.mean_square_degree

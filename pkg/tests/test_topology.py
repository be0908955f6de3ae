import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sisresilience.errors import DegenerateGraphError, InvalidSpecError
from sisresilience.topology import (
    DegreeStats,
    LatticeSpec,
    ScaleFreeSpec,
    build_lattice,
    build_scale_free,
    degree_stats,
    from_edges,
    load_edge_list,
    mean_field_threshold,
)


def moore_degrees_brute(w, h):
    """Count in-bounds Moore neighbors cell by cell."""
    out = []
    for r in range(h):
        for c in range(w):
            out.append(sum(
                1 for dr in (-1, 0, 1) for dc in (-1, 0, 1)
                if (dr or dc) and 0 <= r + dr < h and 0 <= c + dc < w
            ))
    return out


def test_periodic_3x3_is_complete_graph():
    t = build_lattice(LatticeSpec(3, 3, "periodic"))
    t.check_invariants()
    assert t.node_count == 9
    for i in range(9):
        assert sorted(t.neighbors(i).tolist()) == [j for j in range(9) if j != i]


def test_open_3x3_degrees():
    t = build_lattice(LatticeSpec(3, 3, "open"))
    t.check_invariants()
    assert moore_degrees_brute(3, 3) == [3, 5, 3, 5, 8, 5, 3, 5, 3]
    assert t.degrees.tolist() == [3, 5, 3, 5, 8, 5, 3, 5, 3]


def test_lattice_100x100_size(lattice100):
    lattice100.check_invariants()
    assert lattice100.node_count == 10_000
    assert set(lattice100.degrees.tolist()) == {8}


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 25), st.integers(3, 25))
def test_periodic_lattice_is_8_regular(w, h):
    t = build_lattice(LatticeSpec(w, h, "periodic"))
    t.check_invariants()
    assert np.all(t.degrees == 8)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(1, 20))
def test_open_lattice_matches_brute_force(w, h):
    if w * h < 2:
        with pytest.raises(InvalidSpecError):
            build_lattice(LatticeSpec(w, h, "open"))
        return
    t = build_lattice(LatticeSpec(w, h, "open"))
    t.check_invariants()
    assert t.degrees.tolist() == moore_degrees_brute(w, h)


@pytest.mark.parametrize("w,h,boundary", [(2, 5, "periodic"), (5, 2, "periodic"), (1, 1, "open"), (3, 3, "torus")])
def test_invalid_lattice_rejected(w, h, boundary):
    with pytest.raises(InvalidSpecError):
        build_lattice(LatticeSpec(w, h, boundary))


def test_scale_free_saturated_is_complete():
    t = build_scale_free(ScaleFreeSpec(5, 4, seed=3))
    t.check_invariants()
    assert np.all(t.degrees == 4)
    assert t.edge_count == 10


def test_scale_free_edge_count_and_mean_degree():
    n, m = 1000, 2
    t = build_scale_free(ScaleFreeSpec(n, m, seed=1))
    t.check_invariants()
    initial = (m + 1) * m // 2
    assert t.edge_count == m * (n - (m + 1)) + initial == 1997
    assert degree_stats(t).mean_degree == pytest.approx(2 * 1997 / 1000, abs=0)


def test_scale_free_connected_and_late_nodes_have_m_edges():
    t = build_scale_free(ScaleFreeSpec(300, 3, seed=11))
    assert t.degrees.min() >= 3
    seen, stack = {0}, [0]
    while stack:
        for j in t.neighbors(stack.pop()).tolist():
            if j not in seen:
                seen.add(j)
                stack.append(j)
    assert len(seen) == 300


def test_scale_free_deterministic_given_seed():
    a = build_scale_free(ScaleFreeSpec(500, 2, seed=42))
    b = build_scale_free(ScaleFreeSpec(500, 2, seed=42))
    c = build_scale_free(ScaleFreeSpec(500, 2, seed=43))
    assert a == b
    assert a != c


def test_scale_free_attachment_prefers_high_degree():
    # over many seeds, node 0 (in the initial clique) should end up far above the median degree
    degs = [build_scale_free(ScaleFreeSpec(400, 2, seed=s)).degrees for s in range(5)]
    assert np.mean([d[0] for d in degs]) > 4 * np.mean([np.median(d) for d in degs])


def test_second_moment_ratio_grows_with_size():
    def ratio(n):
        return np.mean([
            (lambda s: s.mean_square_degree / s.mean_degree)(degree_stats(build_scale_free(ScaleFreeSpec(n, 2, seed=s))))
            for s in range(10)
        ])
    assert ratio(10_000) > ratio(1000)


def test_mean_field_threshold_decreases_with_size_seed_averaged():
    def thr(n):
        return np.mean([mean_field_threshold(degree_stats(build_scale_free(ScaleFreeSpec(n, 2, seed=s))))
                        for s in range(10)])
    values = [thr(n) for n in (300, 1000, 3000)]
    assert values[0] > values[1] > values[2]


@pytest.mark.parametrize("edges,n,expect", [
    ([(0, 1), (0, 2), (0, 3), (0, 4)], 5, (1.6, 4.0, 1, 4)),
    ([], 5, (0.0, 0.0, 0, 0)),
])
def test_degree_stats_hand_counts(edges, n, expect):
    s = degree_stats(from_edges(n, edges))
    assert (s.mean_degree, s.mean_square_degree, s.min_degree, s.max_degree) == expect


def test_degree_stats_regular():
    s = degree_stats(build_lattice(LatticeSpec(10, 10)))
    assert (s.mean_degree, s.mean_square_degree) == (8.0, 64.0)


def test_mean_field_threshold_values():
    assert mean_field_threshold(DegreeStats(8.0, 64.0, 8, 8)) == 0.125
    assert mean_field_threshold(DegreeStats(1.6, 4.0, 1, 4)) == pytest.approx(0.4, rel=1e-15)
    with pytest.raises(DegenerateGraphError):
        mean_field_threshold(DegreeStats(0.0, 0.0, 0, 0))


@pytest.mark.parametrize("k", [2, 3, 4, 6, 8, 10])
def test_mean_field_threshold_regular_is_inverse_degree(k):
    nx = pytest.importorskip("networkx")
    g = nx.random_regular_graph(k, 60, seed=k)
    t = from_edges(60, list(g.edges()))
    assert mean_field_threshold(degree_stats(t)) == 1.0 / k


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=80))))
def test_from_edges_invariants(data):
    n, raw = data
    pairs = {(min(a, b), max(a, b)) for a, b in raw if a != b}
    t = from_edges(n, sorted(pairs))
    t.check_invariants()
    assert t.edge_count == len(pairs)
    s = degree_stats(t)
    assert s.mean_square_degree >= s.mean_degree ** 2 - 1e-12
    if pairs:
        assert s.mean_degree > 0


def test_from_edges_rejects_self_loops_and_duplicates():
    with pytest.raises(InvalidSpecError):
        from_edges(3, [(1, 1)])
    with pytest.raises(InvalidSpecError):
        from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(InvalidSpecError):
        from_edges(3, [(0, 3)])


def test_check_invariants_detects_asymmetry():
    t = from_edges(3, [(0, 1)])
    from sisresilience.topology import Topology
    bad = Topology(3, np.array([0, 1, 1, 1]), np.array([1]))
    with pytest.raises(AssertionError):
        bad.check_invariants()
    t.check_invariants()


def test_load_edge_list(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# a comment\n0 1\n1 2\n\n2   3\n# trailing\n")
    t = load_edge_list(p)
    t.check_invariants()
    assert t.node_count == 4
    assert t.kind == "custom"
    assert t.edges().tolist() == [[0, 1], [1, 2], [2, 3]]
    p.write_text("0 1\n0 x\n")
    with pytest.raises(InvalidSpecError, match=":2:"):
        load_edge_list(p)

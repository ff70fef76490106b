import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_graph, small_random_realization
from rcmpaths.errors import OracleSizeError
from rcmpaths.paths import (
    classify_pair_structures,
    classify_path_pairs,
    count_khop_paths,
    count_khop_paths_oracle,
    iter_khop_paths,
    threehop_path_pairs,
)

PATH_4 = [(0, 2), (2, 3), (3, 1)]  # x - a - b - y
COMPLETE_4 = [(i, j) for i in range(4) for j in range(i + 1, 4)]
COMPLETE_5 = [(i, j) for i in range(5) for j in range(i + 1, 5)]


def test_single_path_graph():
    g = build_graph(4, PATH_4)
    assert count_khop_paths(g, 3).count == 1
    assert count_khop_paths_oracle(g, 3).count == 1


def test_complete_graphs():
    assert count_khop_paths(build_graph(4, COMPLETE_4), 3).count == 2
    assert count_khop_paths(build_graph(5, COMPLETE_5), 3).count == 6


def test_one_hop():
    g = build_graph(3, [(0, 1)])
    assert count_khop_paths(g, 1).count == 1
    g2 = build_graph(3, [(0, 2), (2, 1)])
    assert count_khop_paths(g2, 1).count == 0
    assert count_khop_paths(g2, 2).count == 1


def test_empty_edge_set():
    g = build_graph(5, [])
    for k in (1, 2, 3, 4):
        assert count_khop_paths(g, k).count == 0
        assert count_khop_paths_oracle(g, k).count == 0


def test_anchor_not_intermediate():
    # 0-1 edge plus 1-2, 2-3, 3-1: any 3-hop route would have to pass through
    # the far anchor; none may
    g = build_graph(4, [(0, 1), (1, 2), (2, 3), (3, 1)])
    assert count_khop_paths(g, 3).count == 0


def test_isolated_anchor_gives_zero():
    g = build_graph(5, [(2, 3), (3, 4), (2, 4)])
    for k in (1, 2, 3):
        assert count_khop_paths(g, k).count == 0


def test_iter_paths_consistent():
    g = build_graph(5, COMPLETE_5)
    paths = list(iter_khop_paths(g, 3))
    assert len(paths) == count_khop_paths(g, 3).count
    assert len(set(paths)) == len(paths)
    for p in paths:
        assert p[0] == 0 and p[-1] == 1
        assert len(set(p)) == len(p)
        for a, b in zip(p, p[1:]):
            assert g.adjacency[a, b]


def test_allowed_mask_restricts_intermediates():
    g = build_graph(6, [(0, 2), (2, 3), (3, 1), (0, 4), (4, 5), (5, 1)])
    assert count_khop_paths(g, 3).count == 2
    allowed = np.array([True, True, True, True, False, True])
    assert count_khop_paths(g, 3, allowed=allowed).count == 1


def test_oracle_guard():
    g = build_graph(20, [])
    with pytest.raises(OracleSizeError):
        count_khop_paths_oracle(g, 3)


def test_oracle_equals_dfs_on_random_instances():
    checked = 0
    rep = 0
    while checked < 300:
        g = small_random_realization(101, rep)
        rep += 1
        if g is None:
            continue
        checked += 1
        for k in (1, 2, 3, 4):
            assert count_khop_paths(g, k).count == count_khop_paths_oracle(g, k).count


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_adding_edge_never_decreases_counts(rep):
    g = small_random_realization(55, rep)
    if g is None:
        return
    before = {k: count_khop_paths(g, k).count for k in (1, 2, 3, 4)}
    free = np.argwhere(~g.adjacency)
    free = [tuple(ij) for ij in free if ij[0] < ij[1]]
    if not free:
        return
    i, j = free[rep % len(free)]
    adj = g.adjacency.copy()
    adj[i, j] = adj[j, i] = True
    g2 = type(g)(points=g.points, adjacency=adj, seed=0, replication=0)
    for k in (1, 2, 3, 4):
        assert count_khop_paths(g2, k).count >= before[k]


class TestPairClassification:
    def test_single_path(self):
        g = build_graph(4, PATH_4)
        c = classify_pair_structures(g)
        assert (c.sigma0, c.sigma11, c.sigma12, c.sigma21, c.sigma22) == (0, 0, 0, 1, 0)

    def test_complete_four(self):
        # paths x-a-b-y and x-b-a-y share both intermediates
        c = classify_pair_structures(build_graph(4, COMPLETE_4))
        assert (c.sigma0, c.sigma11, c.sigma12, c.sigma21, c.sigma22) == (0, 0, 0, 2, 2)

    def test_two_disjoint_paths(self):
        g = build_graph(6, [(0, 2), (2, 3), (3, 1), (0, 4), (4, 5), (5, 1)])
        c = classify_pair_structures(g)
        assert (c.sigma0, c.sigma11, c.sigma12, c.sigma21, c.sigma22) == (2, 0, 0, 2, 0)

    def test_shared_first_position(self):
        # x-a-b-y and x-a-c-y share a as first intermediate (anchor edge x-a)
        g = build_graph(5, [(0, 2), (2, 3), (3, 1), (2, 4), (4, 1)])
        c = classify_pair_structures(g)
        assert (c.sigma0, c.sigma11, c.sigma12, c.sigma21, c.sigma22) == (0, 2, 0, 2, 0)

    def test_shared_opposite_positions(self):
        # x-a-u-y and x-u-b-y share u at opposite positions, no shared edge
        g = build_graph(5, [(0, 2), (2, 4), (4, 1), (0, 4), (4, 3), (3, 1)])
        c = classify_pair_structures(g)
        assert c.sigma12 == 2
        assert c.sigma21 == 2

    def test_mirror_pairs_are_even(self):
        for rep in range(40):
            g = small_random_realization(77, rep)
            if g is None:
                continue
            c = classify_pair_structures(g)
            assert c.sigma11 % 2 == 0
            assert c.sigma12 % 2 == 0
            assert c.sigma22 % 2 == 0

    def test_decomposition_identity_random(self):
        for rep in range(300):
            g = small_random_realization(31, rep)
            if g is None:
                continue
            sigma = count_khop_paths(g, 3).count
            c = classify_pair_structures(g)
            assert c.total == sigma * sigma
            assert c.sigma21 == sigma

    def test_classify_empty(self):
        c = classify_path_pairs(np.empty((0, 2), dtype=np.int64))
        assert c.total == 0

    def test_chunked_classification_matches(self):
        # force multiple blocks through a tiny block size
        import rcmpaths.paths as paths_mod

        g = build_graph(5, COMPLETE_5)
        pairs = threehop_path_pairs(g)
        full = classify_path_pairs(pairs)
        original = paths_mod._PAIR_BLOCK
        try:
            paths_mod._PAIR_BLOCK = 2
            chunked = classify_path_pairs(pairs)
        finally:
            paths_mod._PAIR_BLOCK = original
        assert full == chunked


def test_threehop_pairs_match_iterated_paths():
    for rep in range(40):
        g = small_random_realization(13, rep)
        if g is None:
            continue
        pairs = {tuple(p) for p in threehop_path_pairs(g)}
        expected = {(p[1], p[2]) for p in iter_khop_paths(g, 3)}
        assert pairs == expected

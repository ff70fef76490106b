"""Exact combinatorial counting of k-hop simple paths between the anchors.

A k-hop path is a sequence anchor0 = z0, z1, ..., zk = anchor1 with all
vertices distinct and consecutive vertices adjacent.  Paths are enumerated
anchored at anchor 0, so each undirected path is counted once.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import OracleSizeError, ValidationError
from .sampler import GraphRealization

_ORACLE_MAX_POINTS = 12
_PAIR_BLOCK = 2048


@dataclass(frozen=True)
class PathCount:
    k: int
    count: int


@dataclass(frozen=True)
class PairStructureCounts:
    """Ordered pairs of 3-hop paths, split by how the two paths intersect.

    sigma0   no shared intermediate vertex.
    sigma11  one shared intermediate, same position in both sequences
             (so one anchor edge is shared).
    sigma12  one shared intermediate, opposite positions (no shared edge).
    sigma21  the self-pairs: both intermediates and all edges shared.
    sigma22  both intermediates shared but the paths differ, i.e. one is the
             other with intermediates swapped; only the middle edge is shared.

    The five classes partition all ordered pairs, so their sum is the squared
    path count.  For a pair sharing exactly one intermediate vertex, a shared
    non-anchor edge is impossible (the middle edge would force both
    intermediates to coincide), so no class is missing.
    """

    sigma0: int
    sigma11: int
    sigma12: int
    sigma21: int
    sigma22: int

    @property
    def total(self) -> int:
        return self.sigma0 + self.sigma11 + self.sigma12 + self.sigma21 + self.sigma22


def _neighbor_lists(g: GraphRealization) -> list[np.ndarray]:
    return [np.flatnonzero(g.adjacency[v]) for v in range(g.n)]


def iter_khop_paths(g: GraphRealization, k: int, allowed: np.ndarray | None = None):
    """Yield every k-hop path as a vertex tuple (0, z1, ..., z_{k-1}, 1).

    ``allowed`` optionally masks which vertices may serve as intermediates;
    the anchors are always allowed as endpoints.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    adj = g.adjacency
    neighbors = _neighbor_lists(g)
    visited = np.zeros(g.n, dtype=bool)
    visited[0] = True
    path = [0]

    def walk(v: int, depth: int):
        if depth == k - 1:
            if adj[v, 1]:
                yield tuple(path) + (1,)
            return
        for w in neighbors[v]:
            if w == 1 or visited[w]:
                continue
            if allowed is not None and not allowed[w]:
                continue
            visited[w] = True
            path.append(int(w))
            yield from walk(int(w), depth + 1)
            path.pop()
            visited[w] = False

    if k == 1:
        if adj[0, 1]:
            yield (0, 1)
        return
    yield from walk(0, 0)


def count_khop_paths(g: GraphRealization, k: int, allowed: np.ndarray | None = None) -> PathCount:
    """Count k-hop paths by depth-bounded DFS from anchor 0."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    adj = g.adjacency
    if k == 1:
        return PathCount(k=1, count=int(adj[0, 1]))
    neighbors = _neighbor_lists(g)
    visited = np.zeros(g.n, dtype=bool)
    visited[0] = True

    def walk(v: int, depth: int) -> int:
        if depth == k - 1:
            return int(adj[v, 1])
        total = 0
        for w in neighbors[v]:
            if w == 1 or visited[w]:
                continue
            if allowed is not None and not allowed[w]:
                continue
            visited[w] = True
            total += walk(int(w), depth + 1)
            visited[w] = False
        return total

    return PathCount(k=k, count=walk(0, 0))


def count_khop_paths_oracle(g: GraphRealization, k: int) -> PathCount:
    """Count k-hop paths by exhaustive ordered-tuple enumeration.

    Checks every ordered (k-1)-tuple of distinct non-anchor vertices; kept
    deliberately independent of the DFS so the two can cross-validate.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    non_anchor = g.n - 2
    if non_anchor > _ORACLE_MAX_POINTS:
        raise OracleSizeError(
            f"oracle limited to {_ORACLE_MAX_POINTS} non-anchor points, got {non_anchor}"
        )
    adj = g.adjacency
    count = 0
    for tup in permutations(range(2, g.n), k - 1):
        seq = (0, *tup, 1)
        if all(adj[seq[i], seq[i + 1]] for i in range(k)):
            count += 1
    return PathCount(k=k, count=count)


def threehop_path_pairs(g: GraphRealization) -> np.ndarray:
    """All 3-hop paths as an (m, 2) array of (z1, z2) intermediate indices."""
    adj = g.adjacency
    a = np.flatnonzero(adj[0])
    b = np.flatnonzero(adj[1])
    a = a[a >= 2]
    b = b[b >= 2]
    if len(a) == 0 or len(b) == 0:
        return np.empty((0, 2), dtype=np.int64)
    aa = np.repeat(a, len(b))
    bb = np.tile(b, len(a))
    keep = (aa != bb) & adj[aa, bb]
    return np.column_stack([aa[keep], bb[keep]]).astype(np.int64)


def classify_path_pairs(pairs: np.ndarray) -> PairStructureCounts:
    """Classify every ordered pair of 3-hop paths by intersection structure.

    ``pairs`` holds one (z1, z2) row per path.  Ordered pairs (P, Q) are
    binned by how many intermediate vertices they share and, when sharing
    exactly one, whether it sits at the same sequence position in both.
    """
    m = len(pairs)
    if m == 0:
        return PairStructureCounts(0, 0, 0, 0, 0)
    first = np.ascontiguousarray(pairs[:, 0])
    second = np.ascontiguousarray(pairs[:, 1])
    sigma0 = sigma11 = sigma12 = sigma22 = 0
    for lo in range(0, m, _PAIR_BLOCK):
        hi = min(lo + _PAIR_BLOCK, m)
        f_blk = first[lo:hi, None]
        s_blk = second[lo:hi, None]
        same_first = f_blk == first[None, :]
        same_second = s_blk == second[None, :]
        cross_fs = f_blk == second[None, :]
        cross_sf = s_blk == first[None, :]
        shared = (
            same_first.astype(np.int8)
            + same_second.astype(np.int8)
            + cross_fs.astype(np.int8)
            + cross_sf.astype(np.int8)
        )
        sigma0 += int((shared == 0).sum())
        one = shared == 1
        sigma11 += int((one & (same_first | same_second)).sum())
        sigma12 += int((one & (cross_fs | cross_sf)).sum())
        sigma22 += int(((shared == 2) & cross_fs & cross_sf).sum())
    # paths are distinct rows, so "both positions equal" happens only on the
    # diagonal: those are the self-pairs
    sigma21 = m
    return PairStructureCounts(
        sigma0=sigma0, sigma11=sigma11, sigma12=sigma12, sigma21=sigma21, sigma22=sigma22
    )


def classify_pair_structures(g: GraphRealization) -> PairStructureCounts:
    """Enumerate all 3-hop paths of ``g`` and classify their ordered pairs."""
    return classify_path_pairs(threehop_path_pairs(g))

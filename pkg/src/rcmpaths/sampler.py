"""Conditioned Poisson sampling and graph realization.

The two anchors are always placed at (0, 0) and (anchor_distance, 0); the
model is isotropic, so fixing the axis loses no generality.  The sampling
rectangle is the anchors' bounding box expanded by the margin on every side.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import ConnectionSpec, ModelParams, Point, Region
from .rng import pair_uniforms, points_key

_local = threading.local()


def _fast_points_rng(seed: int, replication: int) -> np.random.Generator:
    """Same stream as :func:`rcmpaths.rng.points_generator`, but reusing one
    Philox instance per thread (construction dominates at high replication
    counts).  The returned generator aliases the shared bit generator, so it
    must be consumed before the next call on the same thread; it never
    escapes :func:`sample_conditioned_ppp`.
    """
    bg = getattr(_local, "philox", None)
    if bg is None:
        bg = np.random.Philox(key=[0, 0])
        _local.philox = bg
    k0, k1 = points_key(seed, replication)
    bg.state = {
        "bit_generator": "Philox",
        "state": {
            "counter": np.zeros(4, dtype=np.uint64),
            "key": np.array([k0, k1], dtype=np.uint64),
        },
        "buffer": np.zeros(4, dtype=np.uint64),
        "buffer_pos": 4,
        "has_uint32": 0,
        "uinteger": 0,
    }
    return np.random.Generator(bg)


@dataclass(frozen=True, eq=False)
class GraphRealization:
    """One sampled graph with two distinguished anchors.

    ``points`` has shape (n, 2); rows 0 and 1 are the anchors.  ``adjacency``
    is a symmetric boolean matrix with a zero diagonal.
    """

    points: np.ndarray
    adjacency: np.ndarray
    seed: int
    replication: int

    def __post_init__(self) -> None:
        n = len(self.points)
        if n < 2:
            raise ValidationError("a realization needs at least the two anchors")
        if self.points.shape != (n, 2):
            raise ValidationError(f"points must have shape (n, 2), got {self.points.shape}")
        if self.adjacency.shape != (n, n) or self.adjacency.dtype != np.bool_:
            raise ValidationError("adjacency must be an (n, n) boolean matrix")
        if self.adjacency.diagonal().any():
            raise ValidationError("self-edges are forbidden")
        if not np.array_equal(self.adjacency, self.adjacency.T):
            raise ValidationError("adjacency must be symmetric")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def seed_info(self) -> tuple[int, int]:
        return (self.seed, self.replication)

    def edges(self) -> np.ndarray:
        """Edge list as an (m, 2) array of sorted index pairs."""
        iu, ju = np.triu_indices(self.n, k=1)
        keep = self.adjacency[iu, ju]
        return np.column_stack([iu[keep], ju[keep]])


def region_for(params: ModelParams) -> Region:
    """Sampling rectangle: anchor bounding box grown by the margin."""
    m = params.margin
    r = params.anchor_distance
    return Region(Point(-m, -m), Point(r + m, m))


def sample_conditioned_ppp(params: ModelParams, seed: int, replication: int) -> np.ndarray:
    """Sample the conditioned point set for one replication.

    Returns an (N + 2, 2) array: the anchors at (0, 0) and
    (anchor_distance, 0) followed by N ~ Poisson(rho * area) points placed
    uniformly in the sampling rectangle.  Pure function of
    (params, seed, replication).
    """
    region = region_for(params)
    rng = _fast_points_rng(seed, replication)
    n = int(rng.poisson(params.rho * region.area))
    u = rng.random((n, 2))
    pts = np.empty((n + 2, 2))
    pts[0] = (0.0, 0.0)
    pts[1] = (params.anchor_distance, 0.0)
    pts[2:, 0] = region.min_corner.x + u[:, 0] * region.width
    pts[2:, 1] = region.min_corner.y + u[:, 1] * region.height
    return pts


def connection_probabilities(spec: ConnectionSpec, sq_dists: np.ndarray) -> np.ndarray:
    """Link probabilities from squared distances.

    Shared by the full-matrix realization and the lazy per-pair path so both
    produce bit-identical edge decisions.
    """
    return spec.evaluate(np.sqrt(sq_dists))


def realize_graph(
    points: np.ndarray,
    spec: ConnectionSpec,
    seed: int,
    replication: int,
    min_prob: float = 0.0,
) -> GraphRealization:
    """Draw every pairwise edge of the realization.

    Each unordered pair {i, j} gets an edge independently with probability
    H(distance), decided by the pair-keyed uniform stream.  ``min_prob``
    optionally zeroes probabilities below a floor to skip hopeless pairs; it
    changes which edges *can* appear, so keep it 0 in any exactness test.
    """
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        raise ValidationError("need the two anchors at indices 0 and 1")
    n = len(points)
    iu, ju = np.triu_indices(n, k=1)
    dx = points[iu, 0] - points[ju, 0]
    dy = points[iu, 1] - points[ju, 1]
    probs = connection_probabilities(spec, dx * dx + dy * dy)
    if min_prob > 0.0:
        probs = np.where(probs < min_prob, 0.0, probs)
    u = pair_uniforms(seed, replication, iu, ju)
    hit = u < probs
    adjacency = np.zeros((n, n), dtype=bool)
    adjacency[iu[hit], ju[hit]] = True
    adjacency |= adjacency.T
    return GraphRealization(points=points, adjacency=adjacency, seed=seed, replication=replication)


def sample_realization(params: ModelParams, seed: int, replication: int) -> GraphRealization:
    """Convenience: sample points and realize the graph in one call."""
    pts = sample_conditioned_ppp(params, seed, replication)
    return realize_graph(pts, params.connection, seed, replication)

import numpy as np

from rcmpaths.model import ConnectionSpec, ModelParams
from rcmpaths.sampler import GraphRealization, realize_graph, sample_conditioned_ppp


def build_graph(n: int, edges) -> GraphRealization:
    """Explicit graph on n vertices (anchors at 0 and 1); positions are
    placeholders, only the adjacency matters for combinatorial tests."""
    pts = np.zeros((n, 2))
    pts[:, 0] = np.arange(n, dtype=float)
    adj = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        adj[i, j] = adj[j, i] = True
    return GraphRealization(points=pts, adjacency=adj, seed=0, replication=0)


def small_random_realization(seed: int, replication: int, max_extra: int = 8):
    """A random realization with at most ``max_extra`` non-anchor points,
    suitable for the brute-force oracle.  Varies density and beta with the
    replication index; returns None when the draw exceeds the cap."""
    rho = 0.3 + 0.4 * (replication % 5)
    beta = 0.4 + 0.3 * (replication % 4)
    params = ModelParams(
        rho=rho,
        connection=ConnectionSpec.rayleigh(beta=beta),
        anchor_distance=0.5 + 0.25 * (replication % 3),
        k=3,
        margin=0.8,
    )
    pts = sample_conditioned_ppp(params, seed, replication)
    if len(pts) - 2 > max_extra:
        return None
    return realize_graph(pts, params.connection, seed, replication)

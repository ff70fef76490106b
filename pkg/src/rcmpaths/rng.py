"""Deterministic, replication-indexed randomness.

Every random quantity in a simulation is a pure function of
``(master seed, replication index)`` plus a draw-specific key, so results do
not depend on iteration order, evaluation laziness, or parallel schedule.

Scheme
------
A 64-bit state is folded through the splitmix64 finalizer once per field::

    h = mix64(seed ^ INIT)
    for field in fields:
        h = mix64((h + GAMMA) ^ field)

Streams (so point draws and edge draws never collide):

* point stream: two folded words key a Philox generator per replication;
  the Poisson count is drawn first, then the coordinate uniforms, in that
  fixed order.
* edge stream: the uniform deciding the edge of vertex pair ``{i, j}`` is
  folded from ``(replication, STREAM_EDGES, min(i, j), max(i, j))``.  Any
  subset of pairs can therefore be evaluated lazily, in any order, and
  agrees bit-for-bit with a full-matrix realization.
* subseed stream: derives independent master seeds for sweep grid points.

All integer arithmetic is modulo 2**64 (numpy uint64 wraparound).
"""
from __future__ import annotations

import numpy as np

_U64 = np.uint64
_INIT = _U64(0x5851F42D4C957F2D)
_GAMMA = _U64(0x9E3779B97F4A7C15)
_C1 = _U64(0xBF58476D1CE4E5B9)
_C2 = _U64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1

STREAM_POINTS = 1
STREAM_EDGES = 2
STREAM_SUBSEED = 3


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _C1
    z = (z ^ (z >> _U64(27))) * _C2
    return z ^ (z >> _U64(31))


def _mix64_int(z: int) -> int:
    # bit-identical to _mix64, on plain Python ints (faster for scalars)
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _as_u64(value) -> np.ndarray:
    if isinstance(value, np.ndarray):
        return value.astype(np.uint64)
    return _U64(int(value) & _MASK)


_INIT_I = int(_INIT)
_GAMMA_I = int(_GAMMA)


def _fold_int(seed: int, *fields) -> int:
    h = _mix64_int((seed & _MASK) ^ _INIT_I)
    for f in fields:
        h = _mix64_int(((h + _GAMMA_I) & _MASK) ^ (int(f) & _MASK))
    return h


def fold(seed: int, *fields):
    """Fold ``seed`` and each field into a 64-bit hash.

    Scalar fields give a Python int; array fields broadcast and give a
    uint64 array.  Both routes compute the identical function.
    """
    if not any(isinstance(f, np.ndarray) for f in fields):
        return _fold_int(seed, *fields)
    # uint64 arithmetic wraps by design; silence the overflow warnings locally
    with np.errstate(over="ignore"):
        h = _mix64(_as_u64(seed) ^ _INIT)
        for f in fields:
            h = _mix64((h + _GAMMA) ^ _as_u64(f))
    return h


def _to_unit(h):
    if isinstance(h, int):
        return (h >> 11) * 2.0**-53
    return (h >> _U64(11)).astype(np.float64) * 2.0**-53


def pair_uniforms(seed: int, replication: int, i, j):
    """Uniform(0, 1) variates keyed by the sorted vertex pair ``{i, j}``.

    ``replication``, ``i`` and ``j`` may be scalars or broadcastable integer
    arrays; the result is symmetric in (i, j).
    """
    if not any(isinstance(v, np.ndarray) for v in (replication, i, j)):
        ii, jj = int(i), int(j)
        return _to_unit(fold(seed, replication, STREAM_EDGES, min(ii, jj), max(ii, jj)))
    ii = np.asarray(i, dtype=np.uint64)
    jj = np.asarray(j, dtype=np.uint64)
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    return _to_unit(fold(seed, replication, STREAM_EDGES, lo, hi))


def points_key(seed: int, replication: int) -> tuple[int, int]:
    """128-bit Philox key for the point draws of one replication."""
    return (
        fold(seed, replication, STREAM_POINTS, 0),
        fold(seed, replication, STREAM_POINTS, 1),
    )


def points_generator(seed: int, replication: int) -> np.random.Generator:
    """Philox generator for the point draws of one replication."""
    # keys above 2**63 must be passed as uint64, not Python ints (those would
    # round-trip through float64 and lose low bits)
    key = np.array(points_key(seed, replication), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_subseed(seed: int, index: int) -> int:
    """Independent master seed for sweep grid point ``index``."""
    return int(fold(seed, index, STREAM_SUBSEED))

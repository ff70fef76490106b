"""Core domain types: planar geometry, connection functions, model parameters.

A random connection model is parameterized by a point-process intensity, a
connection function mapping inter-node distance to link probability, the
separation of the two anchor nodes, and the hop count of interest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

RAYLEIGH = "rayleigh"
HARD_DISK = "hard_disk"
TABULATED = "tabulated"
_KINDS = (RAYLEIGH, HARD_DISK, TABULATED)

# Tail threshold used for reach / margin defaults: exp(-25) ~ 1.4e-11 per hop.
_TAIL_LOG = 25.0


@dataclass(frozen=True)
class Point:
    """A position in the plane."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class Region:
    """An axis-aligned rectangle with positive area."""

    min_corner: Point
    max_corner: Point

    def __post_init__(self) -> None:
        if not (self.max_corner.x > self.min_corner.x and self.max_corner.y > self.min_corner.y):
            raise ValidationError("max_corner must strictly dominate min_corner in both coordinates")

    @property
    def width(self) -> float:
        return self.max_corner.x - self.min_corner.x

    @property
    def height(self) -> float:
        return self.max_corner.y - self.min_corner.y

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x, y):
        """Vectorized membership test (closed rectangle)."""
        return (
            (x >= self.min_corner.x)
            & (x <= self.max_corner.x)
            & (y >= self.min_corner.y)
            & (y <= self.max_corner.y)
        )


@dataclass(frozen=True)
class ConnectionSpec:
    """A radial connection function H(r) -> [0, 1].

    Kinds:
      - ``rayleigh``: H(r) = exp(-beta * r**eta) for r > 0.
      - ``hard_disk``: H(r) = 1 for 0 < r <= r0, else 0.
      - ``tabulated``: linear interpolation through (distance, probability)
        knots, constant below the first knot, 0 beyond the last knot.

    All kinds return exactly 0 at r = 0: vertices never connect to themselves,
    so a zero-distance pair (two distinct vertices at one location) never gets
    an edge. ``kernel`` is the continuous extension used by quadrature.
    """

    kind: str
    beta: float = 1.0
    eta: float = 2.0
    r0: float = 1.0
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown connection kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == RAYLEIGH:
            if not (self.beta > 0 and math.isfinite(self.beta)):
                raise ValidationError(f"beta must be a positive real, got {self.beta}")
            if not (self.eta > 0 and math.isfinite(self.eta)):
                raise ValidationError(f"eta must be a positive real, got {self.eta}")
        elif self.kind == HARD_DISK:
            if not (self.r0 > 0 and math.isfinite(self.r0)):
                raise ValidationError(f"r0 must be a positive real, got {self.r0}")
        else:
            if not self.table:
                raise ValidationError("tabulated connection requires at least one (distance, probability) knot")
            table = tuple((float(d), float(p)) for d, p in self.table)
            object.__setattr__(self, "table", table)
            dists = [d for d, _ in table]
            if any(d < 0 for d in dists):
                raise ValidationError("table distances must be nonnegative")
            if any(b <= a for a, b in zip(dists, dists[1:])):
                raise ValidationError("table distances must be strictly increasing")
            if any(not (0.0 <= p <= 1.0) for _, p in table):
                raise ValidationError("table probabilities must lie in [0, 1]")

    @classmethod
    def rayleigh(cls, beta: float = 1.0, eta: float = 2.0) -> "ConnectionSpec":
        return cls(kind=RAYLEIGH, beta=beta, eta=eta)

    @classmethod
    def hard_disk(cls, r0: float) -> "ConnectionSpec":
        return cls(kind=HARD_DISK, r0=r0)

    @classmethod
    def tabulated(cls, knots) -> "ConnectionSpec":
        return cls(kind=TABULATED, table=tuple((float(d), float(p)) for d, p in knots))

    def _raw(self, r: np.ndarray) -> np.ndarray:
        """Connection probability ignoring the r = 0 rule."""
        if self.kind == RAYLEIGH:
            return np.exp(-self.beta * np.power(r, self.eta))
        if self.kind == HARD_DISK:
            return np.where(r <= self.r0, 1.0, 0.0)
        d = np.array([k[0] for k in self.table])
        p = np.array([k[1] for k in self.table])
        out = np.interp(r, d, p, left=p[0], right=0.0)
        out = np.where(r > d[-1], 0.0, out)
        return np.clip(out, 0.0, 1.0)

    def evaluate(self, r):
        """Link probability at distance ``r`` (graph semantics: 0 at r = 0)."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise ValidationError("distances must be nonnegative")
        out = np.where(arr > 0.0, self._raw(arr), 0.0)
        if arr.ndim == 0:
            return float(out)
        return out

    def kernel(self, r):
        """Continuous extension of the connection function, for integration.

        Identical to ``evaluate`` except at r = 0, where the limit from above
        is used; the single zero-distance point has measure zero in every
        integral this package evaluates.
        """
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise ValidationError("distances must be nonnegative")
        out = self._raw(arr)
        if arr.ndim == 0:
            return float(out)
        return out

    @property
    def reach(self) -> float:
        """Distance beyond which the connection probability is negligible.

        Rayleigh: solves exp(-beta * r**eta) = exp(-25). Hard disk and
        tabulated kinds have compact support and return it exactly.
        """
        if self.kind == RAYLEIGH:
            return (_TAIL_LOG / self.beta) ** (1.0 / self.eta)
        if self.kind == HARD_DISK:
            return self.r0
        return self.table[-1][0]


def evaluate_connection(spec: ConnectionSpec, r):
    """Connection probability at distance ``r`` for ``spec``."""
    return spec.evaluate(r)


def default_margin(connection: ConnectionSpec, k: int) -> float:
    """Default box margin so truncating the plane to a rectangle is harmless.

    Rayleigh: reach * sqrt(k), i.e. 5/sqrt(beta) * sqrt(k) when eta = 2
    (per-hop tail exp(-25)). Compact-support kinds: support radius * k, which
    no k-hop path can outrun.
    """
    if connection.kind == RAYLEIGH:
        return connection.reach * math.sqrt(k)
    return connection.reach * k


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one simulated scenario.

    ``margin`` may be left as None to use :func:`default_margin`.
    """

    rho: float
    connection: ConnectionSpec
    anchor_distance: float
    k: int
    margin: float | None = None

    def __post_init__(self) -> None:
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValidationError(f"rho must be a positive real, got {self.rho}")
        if not isinstance(self.k, (int, np.integer)) or isinstance(self.k, bool) or self.k < 1:
            raise ValidationError(f"k must be an integer >= 1, got {self.k!r}")
        if not (self.anchor_distance >= 0 and math.isfinite(self.anchor_distance)):
            raise ValidationError(f"anchor_distance must be a nonnegative real, got {self.anchor_distance}")
        if self.margin is None:
            object.__setattr__(self, "margin", default_margin(self.connection, int(self.k)))
        if not (self.margin > 0 and math.isfinite(self.margin)):
            raise ValidationError(f"margin must be a positive real, got {self.margin}")

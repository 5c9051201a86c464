"""Geometry of the two model spaces: Euclidean boxes and unit spheres.

Points live in ambient coordinates (length ``n`` for Euclidean space,
``n + 1`` for the sphere embedded in R^{n+1}).  Tangent vectors on the
sphere are carried in the same ambient coordinates, which keeps
``tr(v v^T) = ||v||^2`` equal to the squared geodesic distance without any
per-point frame bookkeeping.

Randomness is reproducible by construction: every sampling routine is keyed
by a 64-bit seed plus a stream index, fed to numpy's counter-based Philox
generator.  Stream ``s`` of seed ``q`` is ``Philox(key=[q, s])``, so parallel
and serial runs that agree on (seed, stream) agree on the bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AntipodalPairError",
    "Euclidean",
    "UnitSphere",
    "SampleSet",
    "rng_stream",
]

# Log map on the sphere is refused this close to the cut locus.
ANTIPODAL_MARGIN = 1e-8


class AntipodalPairError(ValueError):
    """Sphere log map requested at (numerically) antipodal points."""


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for the pair (seed, stream).

    Distinct streams of the same seed are independent, so per-trial streams
    can be handed to parallel workers without coordination.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _as_point(x, coord_dim: int) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.shape != (coord_dim,):
        raise ValueError(f"expected a point of length {coord_dim}, got shape {p.shape}")
    return p


def _normalize_region(n: int, region) -> np.ndarray:
    """Coerce a sampling box to shape (n, 2); default is the unit cube."""
    if region is None:
        box = np.tile([0.0, 1.0], (n, 1))
    else:
        box = np.asarray(region, dtype=float)
        if box.shape == (2,):
            box = np.tile(box, (n, 1))
        if box.shape != (n, 2):
            raise ValueError(f"region must be (lo, hi) or an ({n}, 2) array")
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("degenerate sampling box: every side needs hi > lo")
    return box


@dataclass(frozen=True)
class SampleSet:
    """An ordered batch of manifold points plus the randomness that made it."""

    manifold: "Euclidean | UnitSphere"
    points: np.ndarray  # (k, coord_dim)
    seed: int
    stream: int = 0

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def k(self) -> int:
        return self.points.shape[0]


class _ManifoldBase:
    """Shared plumbing; concrete spaces fill in the geometric kernels."""

    coord_dim: int

    def sample_uniform(self, k: int, seed: int, *, stream: int = 0, region=None) -> SampleSet:
        """Draw k independent uniform points; identical inputs give identical bits."""
        if k < 1:
            raise ValueError("k must be at least 1")
        rng = rng_stream(seed, stream)
        pts = self._draw(rng, k, region)
        return SampleSet(manifold=self, points=pts, seed=seed, stream=stream)

    def expected_distance(self, trials: int, seed: int, *, stream: int = 0, region=None) -> float:
        """Monte Carlo estimate of E d(X, Y) for independent uniform X, Y.

        Draws a single 2*trials sample and pairs the first half against the
        second, so trials=1 returns the distance of points[0] and points[1]
        of the corresponding 2-point sample.
        """
        if trials < 1:
            raise ValueError("trials must be at least 1")
        pts = self.sample_uniform(2 * trials, seed, stream=stream, region=region).points
        return float(np.mean(self.paired_distance(pts[:trials], pts[trials:])))

    def _check_pair(self, p, q):
        return _as_point(p, self.coord_dim), _as_point(q, self.coord_dim)


@dataclass(frozen=True)
class Euclidean(_ManifoldBase):
    """Flat R^n.  Uniform sampling requires a bounded axis-aligned box."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def coord_dim(self) -> int:
        return self.n

    def distance(self, p, q) -> float:
        p, q = self._check_pair(p, q)
        return float(np.linalg.norm(p - q))

    def log_map(self, p, q) -> np.ndarray:
        """Tangent vector at p pointing to q; here simply q - p."""
        p, q = self._check_pair(p, q)
        return q - p

    def exp_map(self, p, v) -> np.ndarray:
        p, v = self._check_pair(p, v)
        return p + v

    def paired_distance(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.linalg.norm(X - Y, axis=1)

    def distance_matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        diff = X[:, None, :] - Y[None, :, :]
        return np.sqrt((diff * diff).sum(axis=-1))

    def _draw(self, rng: np.random.Generator, k: int, region) -> np.ndarray:
        box = _normalize_region(self.n, region)
        return rng.uniform(box[:, 0], box[:, 1], size=(k, self.n))

    def __str__(self):
        return f"euclid:{self.n}"


@dataclass(frozen=True)
class UnitSphere(_ManifoldBase):
    """Unit n-sphere in R^{n+1} with the arc-length (geodesic) distance."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")

    @property
    def coord_dim(self) -> int:
        return self.n + 1

    def distance(self, p, q) -> float:
        p, q = self._check_pair(p, q)
        # clamp guards floating-point drift of nearly (anti)parallel pairs
        return float(np.arccos(np.clip(p @ q, -1.0, 1.0)))

    def log_map(self, p, q) -> np.ndarray:
        """Tangent vector at p of length d(p, q) pointing along the geodesic to q.

        Undefined at the cut locus: antipodal pairs raise AntipodalPairError.
        """
        p, q = self._check_pair(p, q)
        theta = self.distance(p, q)
        if theta > math.pi - ANTIPODAL_MARGIN:
            raise AntipodalPairError(
                f"log map undefined for antipodal pair (distance {theta:.12g})"
            )
        if theta == 0.0:
            return np.zeros(self.coord_dim)
        return (theta / math.sin(theta)) * (q - math.cos(theta) * p)

    def exp_map(self, p, v) -> np.ndarray:
        """Geodesic flow from p along tangent v (requires ||v|| < pi)."""
        p, v = self._check_pair(p, v)
        if abs(float(p @ v)) > 1e-10:
            raise ValueError("vector is not tangent to the sphere at its base point")
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            return p.copy()
        return math.cos(norm) * p + math.sin(norm) * (v / norm)

    def paired_distance(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.arccos(np.clip((X * Y).sum(axis=1), -1.0, 1.0))

    def distance_matrix(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.arccos(np.clip(X @ Y.T, -1.0, 1.0))

    def _draw(self, rng: np.random.Generator, k: int, region) -> np.ndarray:
        if region is not None:
            raise ValueError("sphere sampling takes no region")
        # normalized Gaussians are rotation-invariant, hence uniform
        g = rng.standard_normal((k, self.coord_dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def __str__(self):
        return f"sphere:{self.n}"

"""Uniform periodic spatial grids, complex fields, and Lebesgue-type norms.

Fields live on [-L, L)^d with periodic wrap.  Spatial integrals use the
rectangle rule, which is spectrally accurate for smooth periodic data;
time integrals use the trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "SpatialGrid",
    "Field",
    "Trajectory",
    "SpaceTimeExponents",
    "make_grid",
    "sample_gaussian",
    "lebesgue_norm",
    "spacetime_norm",
]


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid on [-L, L)^d with N nodes per dimension."""

    dim: int
    half_extent: float
    points_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")
        n = self.points_per_dim
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"points_per_dim must be a power of two >= 16, got {n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.points_per_dim

    @property
    def shape(self) -> tuple:
        return (self.points_per_dim,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_dim**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates along one dimension: x_j = -L + j*dx."""
        return -self.half_extent + self.spacing * np.arange(self.points_per_dim)

    def meshes(self) -> tuple:
        """Coordinate arrays broadcast to the grid shape (one per dimension)."""
        return _meshes(self)

    def radius_sq(self) -> np.ndarray:
        """|x|^2 on the grid."""
        return _radius_sq(self)


@lru_cache(maxsize=32)
def _meshes(grid: SpatialGrid) -> tuple:
    ax = grid.axis()
    if grid.dim == 1:
        return (ax,)
    out = np.meshgrid(*([ax] * grid.dim), indexing="ij")
    for m in out:
        m.setflags(write=False)
    return tuple(out)


@lru_cache(maxsize=32)
def _radius_sq(grid: SpatialGrid) -> np.ndarray:
    r2 = sum(m**2 for m in _meshes(grid))
    r2 = np.asarray(r2)
    r2.setflags(write=False)
    return r2


def make_grid(dim: int, half_extent: float, points_per_dim: int) -> SpatialGrid:
    return SpatialGrid(dim=dim, half_extent=float(half_extent), points_per_dim=int(points_per_dim))


@dataclass(eq=False)
class Field:
    """Complex-valued function sampled on a SpatialGrid (values immutable)."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            if v.size == self.grid.size:
                v = v.reshape(self.grid.shape)
            else:
                raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(eq=False)
class Trajectory:
    """Time-indexed sequence of fields on a common grid."""

    times: np.ndarray
    frames: list

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(self.frames) != t.size:
            raise ValueError("times and frames must have equal length")
        if t.size == 0:
            raise ValueError("trajectory must be nonempty")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        g = self.frames[0].grid
        if any(f.grid != g for f in self.frames):
            raise ValueError("all frames must share one grid")
        self.times = t

    @property
    def grid(self) -> SpatialGrid:
        return self.frames[0].grid


@dataclass(frozen=True)
class SpaceTimeExponents:
    """Exponent pair (q, r) for the mixed norm L^q_t L^r_x."""

    q: float
    r: float

    def __post_init__(self):
        if self.q < 1 or self.r < 1:
            raise ValueError("exponents must be >= 1")

    @staticmethod
    def symmetric(p: float) -> "SpaceTimeExponents":
        return SpaceTimeExponents(p, p)

    @staticmethod
    def scattering_diagonal(d: int) -> "SpaceTimeExponents":
        """The diagonal space L^{2(d+2)/d}_{t,x} used as the size diagnostic."""
        e = 2.0 * (d + 2) / d
        return SpaceTimeExponents(e, e)

    @staticmethod
    def interaction_diagonal(p: float, d: int) -> "SpaceTimeExponents":
        """The diagonal space L^{p(d+2)/2}_{t,x} attached to a power p."""
        e = p * (d + 2) / 2.0
        return SpaceTimeExponents(e, e)


def sample_gaussian(grid: SpatialGrid) -> Field:
    """The standard profile exp(-|x|^2/4) sampled on the grid."""
    return Field(grid, np.exp(-grid.radius_sq() / 4.0))


def lebesgue_norm(fld: Field, r: float) -> float:
    """Discrete L^r norm: (sum |u|^r dx^d)^(1/r); max over nodes for r = inf."""
    if r < 1:
        raise ValueError(f"exponent must be >= 1, got {r}")
    a = np.abs(fld.values)
    if math.isinf(r):
        return float(a.max())
    if r == 2.0:
        return float(np.sqrt(np.sum(a * a) * fld.grid.cell_volume))
    return float((np.sum(a**r) * fld.grid.cell_volume) ** (1.0 / r))


def spacetime_norm(traj: Trajectory, exps: SpaceTimeExponents) -> float:
    """Mixed norm || ||u(t)||_{L^r_x} ||_{L^q_t}, trapezoid rule in time.

    A single-frame trajectory is treated as a unit time window, so the
    result reduces to the spatial norm of that frame.
    """
    spatial = np.array([lebesgue_norm(f, exps.r) for f in traj.frames])
    if math.isinf(exps.q):
        return float(spatial.max())
    if len(traj.frames) == 1:
        return float(spatial[0])
    q = exps.q
    return float(np.trapezoid(spatial**q, traj.times) ** (1.0 / q))

"""Uniform periodic grid geometry and spectral bookkeeping.

The domain is the d-dimensional torus [0, 2*pi)^d sampled at n points per
axis, n a power of two.  With extent fixed at 2*pi, the FFT wavenumbers are
exact integers, which keeps trigonometric generators and spectral operators
exact to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonPowerOfTwoError

EXTENT = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Periodic grid on [0, L)^dim with L = 2*pi and spacing h = L/n.

    Attributes
    ----------
    dim : int
        Spatial dimension, 1, 2 or 3.
    n : int
        Points per axis; power of two, at least 8.
    """

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise NonPowerOfTwoError(
                f"n must be a power of two >= 8, got {self.n}"
            )

    @property
    def extent(self) -> float:
        return EXTENT

    @property
    def h(self) -> float:
        return EXTENT / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis_coords(self) -> np.ndarray:
        """Node coordinates along one axis: i*h for i = 0..n-1."""
        return np.arange(self.n) * self.h

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        """Node coordinate arrays, one per axis, each of shape `shape`."""
        x = self.axis_coords()
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Integer wavenumber arrays, one per axis, each of shape `shape`."""
        k1 = np.rint(np.fft.fftfreq(self.n, d=1.0 / self.n)).astype(np.int64)
        return tuple(np.meshgrid(*([k1] * self.dim), indexing="ij"))

    def integrate(self, values: np.ndarray) -> float:
        """Grid quadrature of a nodal scalar field (exact for trig polys)."""
        return float(values.sum() * self.cell_volume)


def make_grid(dim: int, n: int) -> Grid:
    """Build a torus grid; rejects non-power-of-two resolutions."""
    return Grid(dim=int(dim), n=int(n))


@lru_cache(maxsize=64)
def _ball_offsets_cached(dim: int, n: int, eps: float) -> np.ndarray:
    h = EXTENT / n
    r = int(np.ceil(eps / h))
    axis = np.arange(-r, r + 1)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    z = np.stack([m.ravel() for m in mesh], axis=1)
    keep = ((z * h) ** 2).sum(axis=1) < eps * eps
    z = z[keep]
    order = np.lexsort(tuple(z[:, i] for i in range(dim - 1, -1, -1)))
    return np.ascontiguousarray(z[order])


def ball_offsets(grid: Grid, eps: float) -> np.ndarray:
    """Integer offsets z with |z*h| < eps, in lexicographic order.

    The strict inequality and the fixed ordering are part of the quadrature
    contract: ball averages are uniform means over exactly this stencil.
    """
    return _ball_offsets_cached(grid.dim, grid.n, float(eps))


def default_eps_ladder(grid: Grid, eps_max: float | None = None) -> list[float]:
    """Dyadic radius ladder eps_max * 2**-j down to 3h (eps_max = L/8)."""
    if eps_max is None:
        eps_max = EXTENT / 8.0
    floor = 3.0 * grid.h
    ladder = []
    eps = float(eps_max)
    while eps >= floor * (1.0 - 1e-12):
        ladder.append(eps)
        eps *= 0.5
    return ladder


def geometric_ladder(eps_min: float, eps_max: float, count: int) -> list[float]:
    """Geometric ladder from eps_max down to eps_min with `count` rungs."""
    if count < 1:
        raise ValueError("ladder needs at least one rung")
    if count == 1:
        return [float(eps_max)]
    return list(np.geomspace(eps_max, eps_min, count))

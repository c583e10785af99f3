"""Discretized rotationally symmetric mollifiers and their gradients.

A mollifier at radius eps lives on the stencil of integer offsets z with
|z*h| < eps.  Profile values are sampled from rho_eps(z) = eps^-d rho(z/eps)
and renormalized discretely so the stencil mass is exactly one; the gradient
is sampled from the analytic derivative (never differenced) and scaled by
the same renormalization constant.  Two compactly supported profiles are
provided; analysis results must not depend on the choice, and the second
profile exists to test exactly that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, TooWideError, UnderResolvedError
from .grid import Grid, ball_offsets

PROFILES = ("bump", "quartic")


def _profile_values(name: str, r2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(rho(s), radial factor g(s) with grad rho = g * s) at squared radii r2.

    Both profiles are supported on |s| < 1 and vanish on the boundary.
    """
    rho = np.zeros_like(r2)
    gfac = np.zeros_like(r2)
    inside = r2 < 1.0
    ri = r2[inside]
    if name == "bump":
        w = 1.0 - ri
        rho[inside] = np.exp(-1.0 / w)
        gfac[inside] = rho[inside] * (-2.0 / (w * w))
    elif name == "quartic":
        w = 1.0 - ri
        rho[inside] = w * w
        gfac[inside] = -4.0 * w
    else:
        raise ValueError(f"unknown profile {name!r}; choose from {PROFILES}")
    return rho, gfac


@dataclass(frozen=True)
class Mollifier:
    """Stencil samples of rho_eps and grad rho_eps, discretely renormalized.

    Attributes
    ----------
    eps : float
        Mollification radius in grid coordinates.
    grid : Grid
    offsets : ndarray, shape (K, dim)
        Integer offsets with |z*h| < eps, lexicographic.
    rho : ndarray, shape (K,)
        Nonnegative weights with sum(rho) * h^dim == 1.
    grad_rho : ndarray, shape (K, dim)
        Analytic gradient samples, odd under z -> -z by construction.
    profile : str
    grad_l1_constant : float
        C = eps * sum |grad_rho| h^dim; approximately constant across radii.
    grad_sup_constant : float
        C = eps * max |grad_rho| * K * h^dim; enters the proof bound on the
        dissipation functional.
    """

    eps: float
    grid: Grid
    offsets: np.ndarray
    rho: np.ndarray
    grad_rho: np.ndarray
    profile: str
    grad_l1_constant: float
    grad_sup_constant: float

    @property
    def stencil_size(self) -> int:
        return int(self.offsets.shape[0])


def make_mollifier(grid: Grid, eps: float, profile: str = "bump") -> Mollifier:
    """Sample and renormalize a mollifier of radius eps on the grid.

    Requires 3h <= eps <= L/4 so the bump is resolved and comfortably
    smaller than the domain.
    """
    eps = float(eps)
    if eps < 3.0 * grid.h:
        raise UnderResolvedError(
            f"eps={eps:.6g} is below 3h={3 * grid.h:.6g}"
        )
    if eps > grid.extent / 4.0:
        raise TooWideError(
            f"eps={eps:.6g} exceeds L/4={grid.extent / 4.0:.6g}"
        )
    offsets = ball_offsets(grid, eps)
    z_phys = offsets * grid.h
    r2 = (z_phys**2).sum(axis=1) / (eps * eps)
    rho_raw, gfac = _profile_values(profile, r2)
    rho_raw = rho_raw / eps**grid.dim
    grad_raw = z_phys * (gfac / eps ** (grid.dim + 2))[:, None]
    mass = rho_raw.sum() * grid.cell_volume
    rho = rho_raw / mass
    grad = grad_raw / mass
    gnorm = np.sqrt((grad**2).sum(axis=1))
    hd = grid.cell_volume
    return Mollifier(
        eps=eps,
        grid=grid,
        offsets=offsets,
        rho=rho,
        grad_rho=grad,
        profile=profile,
        grad_l1_constant=float(eps * gnorm.sum() * hd),
        grad_sup_constant=float(eps * gnorm.max() * len(offsets) * hd),
    )


def mollify(grid: Grid, snapshot: np.ndarray, mol: Mollifier) -> np.ndarray:
    """Periodic discrete convolution of one snapshot with the rho weights.

    Accepts a scalar field (n, ..., n) or a vector field (c, n, ..., n).
    """
    if mol.grid != grid:
        raise GridMismatchError("mollifier was built for a different grid")
    scalar = snapshot.ndim == grid.dim
    data = snapshot[None] if scalar else snapshot
    if data.shape[1:] != grid.shape:
        raise GridMismatchError("snapshot shape does not match the grid")
    axes = tuple(range(1, grid.dim + 1))
    out = np.zeros_like(data, dtype=float)
    for z, w in zip(mol.offsets, mol.rho):
        out += w * np.roll(data, tuple(z), axis=axes)
    out *= grid.cell_volume
    return out[0] if scalar else out

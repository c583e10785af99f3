"""Velocity/pressure field storage and exact or synthetic generators.

A `GridField` is one flow realization: a time series of velocity snapshots
(and optionally pressure) on a periodic grid.  Generators either sample an
exact steady Euler solution (Taylor-Green cell, cosine shear) or synthesize
a divergence-free field with prescribed power-law Fourier amplitudes and
seeded random phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .errors import EmptyBandError, GridMismatchError
from .grid import Grid, make_grid

DEFAULT_SNAPSHOTS = 17


@dataclass(frozen=True)
class GridField:
    """One realization: velocity (and optional pressure) snapshots.

    Attributes
    ----------
    grid : Grid
    times : ndarray, shape (S,)
        Strictly increasing sample instants.
    velocity : ndarray, shape (S, dim, n, ..., n)
        Velocity components on grid nodes.
    pressure : ndarray, shape (S, n, ..., n), optional
    """

    grid: Grid
    times: np.ndarray
    velocity: np.ndarray
    pressure: np.ndarray | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "velocity", vel)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a nonempty 1-d array")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        expected = (times.size, self.grid.dim) + self.grid.shape
        if vel.shape != expected:
            raise ValueError(f"velocity shape {vel.shape} != {expected}")
        if not np.all(np.isfinite(vel)):
            raise ValueError("velocity contains non-finite values")
        if self.pressure is not None:
            p = np.asarray(self.pressure, dtype=float)
            object.__setattr__(self, "pressure", p)
            if p.shape != (times.size,) + self.grid.shape:
                raise ValueError("pressure shape does not match grid/times")
            if not np.all(np.isfinite(p)):
                raise ValueError("pressure contains non-finite values")

    @property
    def snapshots(self) -> int:
        return int(self.times.size)

    @property
    def has_pressure(self) -> bool:
        return self.pressure is not None

    def is_steady(self) -> bool:
        """True if every snapshot equals the first (bitwise)."""
        v0 = self.velocity[0]
        if not all(np.array_equal(self.velocity[s], v0) for s in range(1, self.snapshots)):
            return False
        if self.pressure is not None:
            p0 = self.pressure[0]
            return all(np.array_equal(self.pressure[s], p0) for s in range(1, self.snapshots))
        return True


def _steady_times(snapshots: int, horizon: float = 1.0) -> np.ndarray:
    return np.linspace(0.0, horizon, snapshots)


def _tile_steady(grid: Grid, v: np.ndarray, p: np.ndarray | None,
                 snapshots: int) -> GridField:
    times = _steady_times(snapshots)
    vel = np.broadcast_to(v, (snapshots,) + v.shape).copy()
    pre = None
    if p is not None:
        pre = np.broadcast_to(p, (snapshots,) + p.shape).copy()
    return GridField(grid=grid, times=times, velocity=vel, pressure=pre)


def taylor_green(grid: Grid, snapshots: int = DEFAULT_SNAPSHOTS) -> GridField:
    """Steady Taylor-Green cell v = (sin x cos y, -cos x sin y).

    The matching pressure is p = (cos 2x + cos 2y)/4, which has zero mean and
    satisfies (v.grad)v + grad p = 0 pointwise.
    """
    if grid.dim != 2:
        raise ValueError("taylor_green requires a 2-d grid")
    X, Y = grid.meshgrid()
    v = np.stack([np.sin(X) * np.cos(Y), -np.cos(X) * np.sin(Y)])
    p = 0.25 * (np.cos(2 * X) + np.cos(2 * Y))
    return _tile_steady(grid, v, p, snapshots)


def shear_flow(grid: Grid, profile_modes=((1, 1.0),),
               snapshots: int = DEFAULT_SNAPSHOTS) -> GridField:
    """Steady shear v = (f(y), 0) with f a finite cosine series, p = 0.

    `profile_modes` is a sequence of (wavenumber, amplitude) pairs defining
    f(y) = sum_a amp * cos(k y).  Any shear is an exact steady solution:
    (v.grad)v vanishes identically.
    """
    if grid.dim != 2:
        raise ValueError("shear_flow requires a 2-d grid")
    _, Y = grid.meshgrid()
    f = np.zeros_like(Y)
    for k, amp in profile_modes:
        f += amp * np.cos(int(k) * Y)
    v = np.stack([f, np.zeros_like(f)])
    p = np.zeros_like(f)
    return _tile_steady(grid, v, p, snapshots)


def _divfree_basis(kvecs: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the divergence-free subspace at each wavevector.

    Returns an array (n_modes, n_pol, dim): one polarization in 2-d (k-perp),
    two in 3-d.
    """
    kn = kvecs / np.linalg.norm(kvecs, axis=1, keepdims=True)
    if kvecs.shape[1] == 2:
        perp = np.stack([-kn[:, 1], kn[:, 0]], axis=1)
        return perp[:, None, :]
    # 3-d: build e1 orthogonal to k via the most orthogonal coordinate axis
    pick = np.argmin(np.abs(kn), axis=1)
    a = np.eye(3)[pick]
    e1 = np.cross(kn, a)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(kn, e1)
    return np.stack([e1, e2], axis=1)


def random_besov_field(grid: Grid, alpha: float, seed: int,
                       k_min: int = 2, k_max: int | None = None,
                       member: int = 0,
                       snapshots: int = 1) -> GridField:
    """Divergence-free field with |v_hat(k)| = |k|^-(alpha + d/2) on a band.

    Modes with k_min <= |k| <= k_max carry exactly the power-law amplitude
    and one uniform random phase each (drawn from the documented counter
    stream in :mod:`ostf.rng`, sub-stream `member`), polarized inside the
    divergence-free subspace so the Leray projection acts as the identity.
    Same (seed, member) gives a bit-identical field.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if grid.dim == 1:
        raise ValueError("random_besov_field needs dim >= 2 (divergence-free)")
    if k_max is None:
        k_max = grid.n // 3
    k_min, k_max = int(k_min), int(k_max)
    if k_min < 1 or k_min >= k_max:
        raise EmptyBandError(f"band [{k_min}, {k_max}] is empty or degenerate")
    if k_max > grid.n // 3:
        raise EmptyBandError(
            f"k_max {k_max} exceeds the resolvable bound n/3 = {grid.n // 3}"
        )

    kaxes = grid.wavenumbers()
    kmag = np.sqrt(sum(k.astype(float) ** 2 for k in kaxes))
    band = (kmag >= k_min) & (kmag <= k_max)
    # half space: first nonzero wavenumber component positive
    half = np.zeros_like(band)
    strict_prev = np.zeros_like(band)
    for k in kaxes:
        half |= band & ~strict_prev & (k > 0)
        strict_prev |= k != 0
    idx = np.nonzero(half)
    kvecs = np.stack([k[idx] for k in kaxes], axis=1).astype(float)
    order = np.lexsort(tuple(kvecs[:, i] for i in range(grid.dim - 1, -1, -1)))
    idx = tuple(ix[order] for ix in idx)
    kvecs = kvecs[order]

    amp = np.linalg.norm(kvecs, axis=1) ** (-(alpha + grid.dim / 2.0))
    pol = _divfree_basis(kvecs)
    n_pol = pol.shape[1]
    key = rng.member_key(seed, member)
    u = rng.uniforms(key, len(kvecs) * (n_pol + 1)).reshape(len(kvecs), n_pol + 1)
    phase = np.exp(2j * np.pi * u[:, 0])
    if n_pol == 1:
        coef = pol[:, 0, :]
    else:
        chi = 2.0 * np.pi * u[:, 1]
        coef = pol[:, 0, :] * np.cos(chi)[:, None] + pol[:, 1, :] * np.sin(chi)[:, None]
    vhat_half = amp[:, None] * phase[:, None] * coef

    vhat = np.zeros((grid.dim,) + grid.shape, dtype=complex)
    conj_idx = tuple((-ix) % grid.n for ix in idx)
    for c in range(grid.dim):
        vhat[(c,) + idx] = vhat_half[:, c]
        vhat[(c,) + conj_idx] = np.conj(vhat_half[:, c])
    axes = tuple(range(1, grid.dim + 1))
    v = np.fft.ifftn(vhat, axes=axes).real * grid.n**grid.dim

    if snapshots == 1:
        times = np.array([0.0])
        vel = v[None]
        return GridField(grid=grid, times=times, velocity=vel)
    return _tile_steady(grid, v, None, snapshots)


# -- spectral operators ----------------------------------------------------


def _fft_axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(1, grid.dim + 1))


def _nyquist_mask(grid: Grid) -> np.ndarray:
    """True where any wavenumber component sits at the Nyquist frequency."""
    kaxes = grid.wavenumbers()
    mask = np.zeros(grid.shape, dtype=bool)
    for k in kaxes:
        mask |= np.abs(k) == grid.n // 2
    return mask


def leray_project_snapshot(grid: Grid, v: np.ndarray) -> np.ndarray:
    """Project one velocity snapshot (dim, n, ..., n) onto div-free fields.

    Nyquist modes are zeroed: the projector matrix is ill-defined there for
    real fields (the mode is its own conjugate partner), and they carry no
    resolvable derivative information.
    """
    kaxes = grid.wavenumbers()
    vhat = np.fft.fftn(v, axes=_fft_axes(grid))
    vhat[:, _nyquist_mask(grid)] = 0.0
    k2 = sum(k.astype(float) ** 2 for k in kaxes)
    k2safe = np.where(k2 > 0, k2, 1.0)
    kdotv = sum(k * vhat[c] for c, k in enumerate(kaxes))
    for c, k in enumerate(kaxes):
        vhat[c] -= k * kdotv / k2safe
    return np.fft.ifftn(vhat, axes=tuple(range(1, grid.dim + 1))).real


def leray_project(fld: GridField) -> GridField:
    """Fourier-space projection v_hat -> (I - k k^T/|k|^2) v_hat, idempotent.

    The zero mode (spatial mean) is left untouched.
    """
    vel = np.stack([leray_project_snapshot(fld.grid, fld.velocity[s])
                    for s in range(fld.snapshots)])
    return replace(fld, velocity=vel)


def divergence_residual(fld: GridField) -> float:
    """max |k . v_hat| / max |v_hat| over snapshots (0 for constant fields)."""
    grid = fld.grid
    kaxes = grid.wavenumbers()
    worst = 0.0
    for s in range(fld.snapshots):
        vhat = np.fft.fftn(fld.velocity[s], axes=_fft_axes(grid))
        div = sum(k * vhat[c] for c, k in enumerate(kaxes))
        scale = float(np.max(np.abs(vhat)))
        if scale == 0.0:
            continue
        worst = max(worst, float(np.max(np.abs(div))) / scale)
    return worst


def solve_pressure_snapshot(grid: Grid, v: np.ndarray) -> np.ndarray:
    """Euler pressure from -lap p = sum_kl d2/dxk dxl (v^l v^k), zero mean."""
    kaxes = grid.wavenumbers()
    k2 = sum(k.astype(float) ** 2 for k in kaxes)
    k2safe = np.where(k2 > 0, k2, 1.0)
    rhs_hat = np.zeros(grid.shape, dtype=complex)
    spatial = tuple(range(v[0].ndim))
    for a, ka in enumerate(kaxes):
        for b, kb in enumerate(kaxes):
            prod_hat = np.fft.fftn(v[a] * v[b], axes=spatial)
            rhs_hat += -(ka * kb) * prod_hat          # (i ka)(i kb) fft(va vb)
    # -lap p = rhs  =>  |k|^2 p_hat = rhs_hat
    p_hat = rhs_hat / k2safe
    p_hat[(0,) * grid.dim] = 0.0                      # zero-mean gauge
    p_hat[_nyquist_mask(grid)] = 0.0
    return np.fft.ifftn(p_hat).real


def solve_pressure(fld: GridField, snapshot: int = 0) -> np.ndarray:
    """Pressure for one snapshot by the spectral Poisson solve."""
    return solve_pressure_snapshot(fld.grid, fld.velocity[snapshot])


def attach_pressure(fld: GridField) -> GridField:
    """Return a copy with spectrally solved pressure on every snapshot."""
    if fld.is_steady():
        p0 = solve_pressure_snapshot(fld.grid, fld.velocity[0])
        pre = np.broadcast_to(p0, (fld.snapshots,) + fld.grid.shape).copy()
    else:
        pre = np.stack([solve_pressure_snapshot(fld.grid, fld.velocity[s])
                        for s in range(fld.snapshots)])
    return replace(fld, pressure=pre)


def truncate_to_half_resolution(fld: GridField) -> GridField:
    """Zero every Fourier mode not representable on an n/2 grid (|k_i| < n/4).

    Used as the 'resolved copy' when estimating quadrature floors; the field
    stays on the original grid.
    """
    grid = fld.grid
    k1 = np.rint(np.fft.fftfreq(grid.n, d=1.0 / grid.n)).astype(np.int64)
    keep1 = np.abs(k1) < grid.n // 4
    mask = keep1
    for _ in range(grid.dim - 1):
        mask = np.multiply.outer(mask, keep1)
    axes = _fft_axes(grid)
    vel = np.fft.ifftn(np.fft.fftn(fld.velocity, axes=[a + 1 for a in axes])
                       * mask, axes=[a + 1 for a in axes]).real
    pre = None
    if fld.pressure is not None:
        paxes = tuple(range(1, grid.dim + 1))
        pre = np.fft.ifftn(np.fft.fftn(fld.pressure, axes=paxes) * mask,
                           axes=paxes).real
    return replace(fld, velocity=vel, pressure=pre)


def downsample_half(fld: GridField) -> GridField:
    """Spectrally truncate to |k_i| < n/4, then subsample to the n/2 grid.

    Exact for data already band-limited below n/4; the workhorse behind
    resolution-halving quadrature-floor estimates.
    """
    trunc = truncate_to_half_resolution(fld)
    grid2 = make_grid(fld.grid.dim, fld.grid.n // 2)
    sl = (slice(None), slice(None)) + (slice(None, None, 2),) * fld.grid.dim
    vel = trunc.velocity[sl].copy()
    pre = None
    if trunc.pressure is not None:
        psl = (slice(None),) + (slice(None, None, 2),) * fld.grid.dim
        pre = trunc.pressure[psl].copy()
    return GridField(grid=grid2, times=fld.times, velocity=vel, pressure=pre)


def check_same_grid(a: GridField, b: GridField) -> None:
    if a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")
    if not np.array_equal(a.times, b.times):
        raise GridMismatchError("fields have different time ladders")


__all__ = [
    "GridField", "make_grid", "taylor_green", "shear_flow",
    "random_besov_field", "leray_project", "solve_pressure",
    "attach_pressure", "divergence_residual", "truncate_to_half_resolution",
]

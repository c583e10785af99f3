"""Two-point increment kernels over ball stencils (the hot path).

Everything downstream of the correlation hierarchy reduces to per-offset
sums over the grid: increment moments sum_x |v(x) - v(x-z)|^q, pressure
increment moments, and the cubic flux sum_x psi(x) dv |dv|^2.  This module
computes those sums once over the largest requested stencil; radius ladders
are then partial reductions over nested stencils, so a whole ladder costs
one pass.

Offsets come in +/- pairs.  The scalar moments are invariant under
z -> -z (change of variables x -> x - z on the periodic grid), and the
flux obeys T(-z) = -sum_x psi(x - z) dv(x, z) |dv(x, z)|^2, so only the
canonical half of the stencil is visited; each member's field is rolled
once per pair.

Per-offset results are written to disjoint slots, so the optional thread
pool changes neither values nor their order; rung reductions run in fixed
stencil order (numpy pairwise summation), which pins results run to run.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble, time_weights
from .grid import ball_offsets
from .testfn import TestFunction


def _pairing(offsets: np.ndarray):
    """(zero_index, canonical_indices, mirror_indices) for a +/- symmetric stencil."""
    index = {tuple(z): i for i, z in enumerate(offsets)}
    zero = index.get((0,) * offsets.shape[1])
    canon, mirror = [], []
    for i, z in enumerate(offsets):
        tz = tuple(int(c) for c in z)
        if all(c == 0 for c in tz):
            continue
        neg = tuple(-c for c in tz)
        if tz > neg:
            canon.append(i)
            mirror.append(index[neg])
    return zero, np.asarray(canon), np.asarray(mirror)


@dataclass
class TwoPointMoments:
    """Per-offset, per-member increment sums (time-quadratured, x h^dim).

    s[q] has shape (M, K): member-wise sums of |dv|^q; flux has shape
    (M, K, dim) when a test function was supplied; p_moment has shape (M, K)
    when pressure increments were requested.  Ensemble-level quantities are
    weight contractions over the member axis.
    """

    offsets: np.ndarray
    radii2: np.ndarray
    weights: np.ndarray
    cell_volume: float
    s: dict
    p_moment: np.ndarray | None
    p_exponent: float | None
    flux: np.ndarray | None
    test_sup: float | None

    def rung_mask(self, eps: float) -> np.ndarray:
        return self.radii2 < eps * eps

    def ensemble_s(self, q: float) -> np.ndarray:
        return self.weights @ self.s[q]

    def ensemble_flux(self) -> np.ndarray:
        if self.flux is None:
            raise ValueError("kernel was run without a test function")
        return np.einsum("m,mki->ki", self.weights, self.flux)

    def ensemble_p(self) -> np.ndarray:
        if self.p_moment is None:
            raise ValueError("kernel was run without pressure moments")
        return self.weights @ self.p_moment

    def structure_value(self, q: float, eps: float, member: int | None = None) -> float:
        """d_eps^q(nu^2)^q restricted to one rung: ball-averaged moment."""
        mask = self.rung_mask(eps)
        sums = self.s[q][member][mask] if member is not None else self.ensemble_s(q)[mask]
        return float(sums.sum() / mask.sum())

    def pressure_value(self, eps: float) -> float:
        mask = self.rung_mask(eps)
        return float(self.ensemble_p()[mask].sum() / mask.sum())


def _moment_arrays(q: float, q2: np.ndarray) -> np.ndarray:
    if q == 2.0:
        return q2
    if q == 3.0:
        return q2 * np.sqrt(q2)
    return q2 ** (q / 2.0)


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("OSTF_THREADS", "1") or "1")
    return max(1, int(threads))


def two_point_moments(ensemble: Ensemble, eps_max: float,
                      qs=(2.0, 3.0),
                      pressure_q: float | None = None,
                      test: TestFunction | None = None,
                      t_window=None,
                      threads: int | None = 1) -> TwoPointMoments:
    """Accumulate per-offset increment sums over the eps_max stencil."""
    grid = ensemble.grid
    offsets = ball_offsets(grid, eps_max)
    radii2 = ((offsets * grid.h) ** 2).sum(axis=1)
    qs = tuple(float(q) for q in qs)
    K, M = offsets.shape[0], ensemble.size
    hd = grid.cell_volume
    axes = tuple(range(1, grid.dim + 1))

    wt = time_weights(ensemble.times, t_window)
    if test is not None:
        chi = test.chi_on_grid(grid)
        if ensemble.times.size == 1:
            wt_flux = np.array([1.0])
        else:
            t0, t1 = float(ensemble.times[0]), float(ensemble.times[-1])
            ta, tb = test.t_support
            if ta < t0 - 1e-12 or tb > t1 + 1e-12:
                raise ValueError(
                    f"test support ({ta}, {tb}) exceeds data range ({t0}, {t1})"
                )
            wt_flux = wt * test.theta(ensemble.times)
    else:
        chi = None
        wt_flux = None

    s = {q: np.zeros((M, K)) for q in qs}
    p_arr = np.zeros((M, K)) if pressure_q is not None else None
    flux = np.zeros((M, K, grid.dim)) if test is not None else None

    zero, canon, mirror = _pairing(offsets)
    nthreads = resolve_threads(threads)

    def accumulate(mi: int, s_idx: int, w_time: float, w_flux: float,
                   chunk: np.ndarray) -> None:
        member = ensemble.members[mi]
        v = member.velocity[s_idx]
        p = member.pressure[s_idx] if pressure_q is not None else None
        for k in chunk:
            z = tuple(int(c) for c in offsets[k])
            vroll = np.roll(v, z, axis=axes)        # v(x - z)
            dv = v - vroll
            q2 = (dv * dv).sum(axis=0)
            km = mirror[np.searchsorted(canon, k)]
            for q in qs:
                val = w_time * _moment_arrays(q, q2).sum() * hd
                s[q][mi, k] += val
                s[q][mi, km] += val
            if p_arr is not None:
                dp = p - np.roll(p, z, axis=tuple(range(grid.dim)))
                val = w_time * (np.abs(dp) ** pressure_q).sum() * hd
                p_arr[mi, k] += val
                p_arr[mi, km] += val
            if flux is not None and w_flux != 0.0:
                u = chi * q2
                um = np.roll(chi, z, axis=tuple(range(grid.dim))) * q2
                for c in range(grid.dim):
                    t_c = (u * dv[c]).sum() * hd
                    tm_c = (um * dv[c]).sum() * hd
                    flux[mi, k, c] += w_flux * t_c
                    flux[mi, km, c] -= w_flux * tm_c

    steady_flags = [m.is_steady() for m in ensemble.members]
    chunks = np.array_split(canon, nthreads) if nthreads > 1 else [canon]

    for mi in range(M):
        if steady_flags[mi]:
            passes = [(0, float(wt.sum()),
                       float(wt_flux.sum()) if wt_flux is not None else 0.0)]
        else:
            passes = [(si, float(wt[si]),
                       float(wt_flux[si]) if wt_flux is not None else 0.0)
                      for si in range(ensemble.times.size)
                      if wt[si] != 0.0 or (wt_flux is not None and wt_flux[si] != 0.0)]
        for s_idx, w_time, w_flux in passes:
            if nthreads > 1:
                with ThreadPoolExecutor(max_workers=nthreads) as pool:
                    list(pool.map(
                        lambda ch: accumulate(mi, s_idx, w_time, w_flux, ch),
                        chunks))
            else:
                accumulate(mi, s_idx, w_time, w_flux, canon)

    # zero offset contributes nothing (dv = 0); slots stay zero
    del zero
    return TwoPointMoments(
        offsets=offsets,
        radii2=radii2,
        weights=ensemble.weights,
        cell_volume=hd,
        s=s,
        p_moment=p_arr,
        p_exponent=pressure_q,
        flux=flux,
        test_sup=test.sup_norm if test is not None else None,
    )

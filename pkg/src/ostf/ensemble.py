"""Weighted finite ensembles of fields and their empirical k-point moments.

An ensemble of M weighted realizations induces, by duality, the hierarchy of
empirical correlation measures: the k-point moment of an observable g is the
weighted sum over members of g evaluated at the member's field values.  For
such atomic mixtures the symmetry and consistency axioms hold by
construction; the checker measures them honestly anyway, together with the
integrability bounds and the diagonal-continuity ladder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, OffGridPointError
from .fields import GridField
from .grid import Grid


@dataclass(frozen=True)
class Ensemble:
    """M fields sharing one grid and time ladder, with probability weights.

    `q_exponents` records the integrability exponents tracked for velocity
    and pressure (defaults: 2 and 3 for velocity, 3/2 for pressure).
    """

    members: tuple[GridField, ...]
    weights: np.ndarray
    q_exponents: tuple[float, ...] = (2.0, 3.0, 1.5)

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", tuple(self.members))
        if w.shape != (len(self.members),):
            raise ValueError("weights length must match member count")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-15 * max(1.0, len(self.members)):
            raise ValueError("weights must sum to 1")
        first = self.members[0]
        for m in self.members[1:]:
            if m.grid != first.grid:
                raise GridMismatchError("members live on different grids")
            if not np.array_equal(m.times, first.times):
                raise GridMismatchError("members have different time ladders")
            if m.has_pressure != first.has_pressure:
                raise GridMismatchError(
                    "members disagree on presence of pressure"
                )

    @property
    def grid(self) -> Grid:
        return self.members[0].grid

    @property
    def times(self) -> np.ndarray:
        return self.members[0].times

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def has_pressure(self) -> bool:
        return self.members[0].has_pressure

    def is_steady(self) -> bool:
        return all(m.is_steady() for m in self.members)


def make_ensemble(fields, weights=None) -> Ensemble:
    """Validate members and normalize weights (uniform by default)."""
    fields = list(fields)
    if weights is None:
        w = np.full(len(fields), 1.0 / max(len(fields), 1))
    else:
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights must have positive sum")
        w = w / total
    return Ensemble(members=tuple(fields), weights=w)


def time_weights(times: np.ndarray, t_window=None) -> np.ndarray:
    """Trapezoid quadrature weights on the snapshot ladder.

    A single snapshot gets weight 1 (frozen-in-time convention: the time
    integral degenerates to the spatial functional).  A window (a, b)
    restricts the quadrature to snapshots inside [a, b].
    """
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        return np.array([1.0])
    w = np.zeros_like(times)
    if t_window is not None:
        a, b = t_window
        sel = (times >= a) & (times <= b)
        if sel.sum() < 2:
            raise ValueError("t_window contains fewer than two snapshots")
        sub = time_weights(times[sel])
        w[sel] = sub
        return w
    dt = np.diff(times)
    w[0] = dt[0] / 2
    w[-1] = dt[-1] / 2
    w[1:-1] = (dt[:-1] + dt[1:]) / 2
    return w


def _snapshot_index(times: np.ndarray, t: float) -> int:
    i = int(np.argmin(np.abs(times - t)))
    if abs(times[i] - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t={t} is not a snapshot time")
    return i


def _node_index(grid: Grid, point) -> tuple[int, ...]:
    point = np.atleast_1d(point)
    if point.size != grid.dim:
        raise OffGridPointError(f"point has {point.size} coords, grid dim {grid.dim}")
    if np.issubdtype(point.dtype, np.integer):
        idx = point.astype(int) % grid.n
        return tuple(int(i) for i in idx)
    ratio = np.asarray(point, dtype=float) / grid.h
    nearest = np.rint(ratio)
    if np.any(np.abs(ratio - nearest) > 1e-9):
        raise OffGridPointError(f"point {point} is not a grid node")
    return tuple(int(i) % grid.n for i in nearest)


def moment(ensemble: Ensemble, t: float, points, g) -> float:
    """k-point moment: sum_m w_m g(xi_1, ..., xi_k) at the given grid nodes.

    Each argument passed to `g` is the member's phase-space value at one
    point: an array of length dim (velocity components), extended by the
    pressure value when the ensemble carries pressure.  Points are grid
    nodes, given as integer multi-indices or exact node coordinates.
    """
    s = _snapshot_index(ensemble.times, t)
    idx = [_node_index(ensemble.grid, p) for p in points]
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        args = []
        for j in idx:
            vals = member.velocity[(s, slice(None)) + j]
            if member.has_pressure:
                vals = np.append(vals, member.pressure[(s,) + j])
            args.append(vals)
        total += w * float(g(*args))
    return total


def lq_velocity_bound(ensemble: Ensemble, q: float, sup_over_time: bool = False) -> float:
    """Integrability statistic int <nu^1, |v|^q> dx, time-integrated or sup_t."""
    grid = ensemble.grid
    wt = time_weights(ensemble.times)
    per_t = np.zeros(ensemble.times.size)
    for w, member in zip(ensemble.weights, ensemble.members):
        for s in range(ensemble.times.size):
            speed2 = (member.velocity[s] ** 2).sum(axis=0)
            per_t[s] += w * grid.integrate(speed2 ** (q / 2.0))
    if sup_over_time:
        return float(per_t.max())
    return float((wt * per_t).sum())


def lq_pressure_bound(ensemble: Ensemble, q: float = 1.5) -> float:
    """Time-integrated int <nu^1, |p|^q> dx."""
    grid = ensemble.grid
    wt = time_weights(ensemble.times)
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        if not member.has_pressure:
            continue
        for s in range(ensemble.times.size):
            total += w * wt[s] * grid.integrate(np.abs(member.pressure[s]) ** q)
    return float(total)


def snapshot_index(ensemble: Ensemble, t: float) -> int:
    """Index of the snapshot at time t (exact match within 1e-9)."""
    return _snapshot_index(ensemble.times, t)

"""Structure functions d_eps^q over radius ladders, with exponent fits.

The two-point modulus at radius eps is the ball-averaged, time- and
ensemble-averaged q-th increment moment,

    d_eps^q(nu^2)^q = int_0^T int_D avg_{B_eps(x)} <nu^2, |xi1 - xi2|^q>,

discretized as the uniform mean over the integer-offset stencil |z*h| < eps.
Exponent fits are least squares in log-log over a declared scaling window;
the default window keeps rungs with 8h <= eps <= L/8, where the discrete
ball bias O(h/eps) is small and the radius is comfortably inside the domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble, lq_velocity_bound, make_ensemble, time_weights
from .errors import MissingPressureError
from .fields import GridField
from .grid import default_eps_ladder
from .twopoint import TwoPointMoments, two_point_moments


def fit_loglog(eps: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log(values) vs log(eps) and the fit RMS."""
    le = np.log(np.asarray(eps, dtype=float))
    lv = np.log(np.asarray(values, dtype=float))
    coeffs = np.polyfit(le, lv, 1)
    resid = lv - np.polyval(coeffs, le)
    return float(coeffs[0]), float(np.sqrt(np.mean(resid**2)))


@dataclass(frozen=True)
class StructureFunctionCurve:
    """(eps_j, d_eps_j^q) ladder with a fitted scaling exponent.

    `window` is the inclusive index pair [j_lo, j_hi] into the descending
    ladder over which `alpha_fit` was computed; `residual` is the log-log
    fit RMS.  A degenerate (all-zero) curve carries alpha_fit = nan.
    """

    q: float
    eps_ladder: np.ndarray
    values: np.ndarray
    alpha_fit: float
    window: tuple[int, int]
    residual: float

    @property
    def degenerate(self) -> bool:
        return not np.isfinite(self.alpha_fit)

    def window_slice(self) -> slice:
        return slice(self.window[0], self.window[1] + 1)

    def to_csv(self) -> str:
        lines = ["eps,value,q"]
        for e, v in zip(self.eps_ladder, self.values):
            lines.append(f"{e:.17g},{v:.17g},{self.q:.17g}")
        return "\n".join(lines) + "\n"


def default_window(grid, eps_ladder) -> tuple[int, int]:
    """Scaling-window indices: rungs with 8h <= eps <= L/8 when possible.

    Falls back to eps >= 4h, then to the full ladder, so a fit is always
    declared on at least three rungs when the ladder has them.
    """
    eps = np.asarray(eps_ladder, dtype=float)
    for lo, hi in ((8.0 * grid.h, grid.extent / 8.0 + 1e-12),
                   (4.0 * grid.h, np.inf)):
        sel = np.nonzero((eps >= lo * (1 - 1e-12)) & (eps <= hi))[0]
        if sel.size >= 3:
            return int(sel.min()), int(sel.max())
    return 0, int(eps.size - 1)


def _sorted_ladder(eps_ladder) -> np.ndarray:
    eps = np.asarray(sorted(set(float(e) for e in eps_ladder), reverse=True))
    if eps.size == 0:
        raise ValueError("empty radius ladder")
    return eps


def _fit_curve(q, eps, values, grid, window) -> StructureFunctionCurve:
    if window is None:
        window = default_window(grid, eps)
    j_lo, j_hi = int(window[0]), int(window[1])
    sel = slice(j_lo, j_hi + 1)
    wvals = values[sel]
    if wvals.size < 3 or np.any(wvals <= 0.0):
        alpha, resid = float("nan"), float("nan")
    else:
        alpha, resid = fit_loglog(eps[sel], wvals)
    return StructureFunctionCurve(
        q=float(q), eps_ladder=eps, values=values,
        alpha_fit=alpha, window=(j_lo, j_hi), residual=resid,
    )


def curve_from_moments(tp: TwoPointMoments, q: float, eps_ladder, grid,
                       window=None, member: int | None = None) -> StructureFunctionCurve:
    """Assemble a curve from precomputed per-offset moments."""
    eps = _sorted_ladder(eps_ladder)
    vals = np.array([tp.structure_value(q, e, member=member) ** (1.0 / q)
                     for e in eps])
    return _fit_curve(q, eps, vals, grid, window)


def structure_functions(ensemble: Ensemble, qs, eps_ladder=None,
                        window=None, t_window=None,
                        threads: int | None = 1) -> dict[float, StructureFunctionCurve]:
    """Curves for several q from a single kernel pass over the ladder."""
    qs = tuple(float(q) for q in qs)
    for q in qs:
        if q not in (1.5, 2.0, 3.0):
            raise ValueError(f"q must be one of 3/2, 2, 3; got {q}")
    grid = ensemble.grid
    if eps_ladder is None:
        eps_ladder = default_eps_ladder(grid)
    eps = _sorted_ladder(eps_ladder)
    if eps[-1] < 3.0 * grid.h * (1 - 1e-12):
        raise ValueError("ladder radii must be at least 3h")
    tp = two_point_moments(ensemble, eps[0], qs=qs, t_window=t_window,
                           threads=threads)
    return {q: curve_from_moments(tp, q, eps, grid, window) for q in qs}


def structure_function(ensemble: Ensemble, q: float, eps_ladder=None,
                       window=None, t_window=None,
                       threads: int | None = 1) -> StructureFunctionCurve:
    """Ensemble structure-function curve for q in {3/2, 2, 3}."""
    return structure_functions(ensemble, (q,), eps_ladder, window=window,
                               t_window=t_window, threads=threads)[float(q)]


def member_structure_function(fld: GridField, q: float, eps_ladder=None,
                              window=None, threads: int | None = 1) -> StructureFunctionCurve:
    """Single-realization curve d_eps^q(v) (atomic case of the ensemble curve)."""
    return structure_function(make_ensemble([fld]), q, eps_ladder,
                              window=window, threads=threads)


@dataclass(frozen=True)
class MixedDCCurves:
    """The three diagonal-continuity components and their per-rung sum.

    `combined` is the un-rooted mixed modulus per rung:
    <|v1-v2|^2 + |v1-v2|^3 + |p1-p2|^{3/2}> ball-averaged, i.e. the sum of
    the component curves raised back to their q-th powers.
    """

    velocity_q2: StructureFunctionCurve
    velocity_q3: StructureFunctionCurve
    pressure_q32: StructureFunctionCurve
    combined: np.ndarray


def mixed_dc(ensemble: Ensemble, eps_ladder=None, window=None,
             t_window=None, threads: int | None = 1) -> MixedDCCurves:
    """Mixed diagonal-continuity ladder (q=2, 3 on velocity; 3/2 on pressure)."""
    if not ensemble.has_pressure:
        raise MissingPressureError("mixed_dc requires members with pressure")
    grid = ensemble.grid
    if eps_ladder is None:
        eps_ladder = default_eps_ladder(grid)
    eps = _sorted_ladder(eps_ladder)
    tp = two_point_moments(ensemble, eps[0], qs=(2.0, 3.0), pressure_q=1.5,
                           t_window=t_window, threads=threads)
    c2 = curve_from_moments(tp, 2.0, eps, grid, window)
    c3 = curve_from_moments(tp, 3.0, eps, grid, window)
    pv = np.array([tp.pressure_value(e) for e in eps])
    p_curve = _fit_curve(1.5, eps, pv ** (1.0 / 1.5), grid, window)
    combined = c2.values**2 + c3.values**3 + p_curve.values**1.5
    return MixedDCCurves(velocity_q2=c2, velocity_q3=c3,
                         pressure_q32=p_curve, combined=combined)


def minkowski_bound(ensemble: Ensemble, q: float) -> float:
    """2 (int <nu^1, |xi|^q> dx dt)^(1/q): curve values never exceed this."""
    return 2.0 * lq_velocity_bound(ensemble, q) ** (1.0 / q)

"""Space-time test functions: trig polynomial in space, bump profile in time.

A test function is chi(x) * theta(t) with chi(x) = cos(m.x) or sin(m.x) for
an integer mode vector m, and theta a smooth bump supported on an interval
(t_a, t_b).  theta is normalized to peak value 1, so the sup norm of the
whole test function is 1.

For quadrature accuracy the default bump support is centered in the data's
time range: the trapezoid sum of theta' over a uniform snapshot ladder then
vanishes by odd symmetry, which keeps weak time derivatives of steady data
at rounding level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid


def bump(s: np.ndarray) -> np.ndarray:
    """C-infinity bump exp(1 - 1/(1-s^2)) on |s|<1, zero outside, peak 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def bump_derivative(s: np.ndarray) -> np.ndarray:
    """d/ds of `bump`; vanishes with all derivatives at |s| = 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    w = 1.0 - si * si
    out[inside] = np.exp(1.0 - 1.0 / w) * (-2.0 * si / (w * w))
    return out


@dataclass(frozen=True)
class TestFunction:
    """chi(x)*theta(t) with evaluators for value, d/dt and spatial gradient.

    Parameters
    ----------
    mode : tuple of int
        Wavevector m of the spatial factor.
    kind : str
        "cos" or "sin".
    t_support : (float, float)
        Open interval (t_a, t_b) supporting the temporal bump.  theta and all
        its derivatives vanish for t <= t_a and t >= t_b.
    """

    mode: tuple[int, ...]
    kind: str = "cos"
    t_support: tuple[float, float] = (0.2, 0.8)

    __test__ = False          # not a pytest collection target

    def __post_init__(self) -> None:
        if self.kind not in ("cos", "sin"):
            raise ValueError(f"kind must be 'cos' or 'sin', got {self.kind!r}")
        t_a, t_b = self.t_support
        if not t_a < t_b:
            raise ValueError("t_support must be an increasing interval")

    @property
    def dim(self) -> int:
        return len(self.mode)

    @property
    def sup_norm(self) -> float:
        """max |chi*theta| = 1 (bump peaks at 1, trig amplitude 1)."""
        return 1.0

    # -- temporal factor ---------------------------------------------------

    def _s(self, t: np.ndarray) -> tuple[np.ndarray, float]:
        t_a, t_b = self.t_support
        half = 0.5 * (t_b - t_a)
        return (np.asarray(t, dtype=float) - 0.5 * (t_a + t_b)) / half, half

    def theta(self, t) -> np.ndarray:
        s, _ = self._s(t)
        return bump(s)

    def theta_dt(self, t) -> np.ndarray:
        s, half = self._s(t)
        return bump_derivative(s) / half

    # -- spatial factor ----------------------------------------------------

    def _phase(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        phase = np.zeros_like(np.asarray(coords[0], dtype=float))
        for m_i, x_i in zip(self.mode, coords):
            if m_i:
                phase = phase + m_i * np.asarray(x_i, dtype=float)
        return phase

    def chi(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        phase = self._phase(coords)
        return np.cos(phase) if self.kind == "cos" else np.sin(phase)

    def grad_chi(self, coords: tuple[np.ndarray, ...]) -> np.ndarray:
        """Gradient of chi; leading axis indexes the spatial component."""
        phase = self._phase(coords)
        osc = -np.sin(phase) if self.kind == "cos" else np.cos(phase)
        return np.stack([m_i * osc for m_i in self.mode])

    def chi_on_grid(self, grid: Grid) -> np.ndarray:
        return self.chi(grid.meshgrid())

    def grad_chi_on_grid(self, grid: Grid) -> np.ndarray:
        return self.grad_chi(grid.meshgrid())

    # -- combined evaluators -----------------------------------------------

    def value(self, t, coords) -> np.ndarray:
        return self.theta(t) * self.chi(coords)

    def dt(self, t, coords) -> np.ndarray:
        return self.theta_dt(t) * self.chi(coords)

    def grad(self, t, coords) -> np.ndarray:
        return self.theta(t) * self.grad_chi(coords)


def constant_mode(dim: int, t_support: tuple[float, float] = (0.2, 0.8)) -> TestFunction:
    """chi identically 1 (cosine of the zero mode)."""
    return TestFunction(mode=(0,) * dim, kind="cos", t_support=t_support)


def centered_support(times: np.ndarray, fraction: float = 0.6) -> tuple[float, float]:
    """Bump support centered in [times[0], times[-1]] covering `fraction`.

    For a single snapshot (frozen data) the temporal factor is never
    evaluated; a unit-width placeholder keeps the test function valid.
    """
    t0, t1 = float(times[0]), float(times[-1])
    if t1 <= t0:
        return (t0 - 0.5, t0 + 0.5)
    mid = 0.5 * (t0 + t1)
    half = 0.5 * fraction * (t1 - t0)
    return (mid - half, mid + half)

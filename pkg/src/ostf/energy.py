"""Weak-form residuals of the moment hierarchy and the regularized balance.

For an ensemble that represents a statistical solution, the one- and
two-point hierarchy forms integrate to zero against admissible test
functions; the residuals here measure how far given data is from that, at
the grid's quadrature accuracy.  Two-point test functions come in exactly
two shapes: a product of one-point test functions, and the mollifier
pairing rho_eps(x - y) psi(t, x) that drives the five-term regularized
energy balance.

Time derivatives are always taken weakly (theta' integrated against the
data); nothing here differences snapshots.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dissipation import dissipation_eps
from .ensemble import Ensemble, snapshot_index, time_weights
from .errors import CostGuardError, GridMismatchError, MissingPressureError
from .mollifier import Mollifier, make_mollifier
from .testfn import TestFunction


@dataclass(frozen=True)
class SeparableTwoPoint:
    """phi(t, x, y) = phi_a(t, x) * phi_b(t, y)."""

    phi_a: TestFunction
    phi_b: TestFunction


@dataclass(frozen=True)
class MollifierPairing:
    """phi(t, x, y) = rho_eps(x - y) * psi(t, x)."""

    mollifier: Mollifier
    psi: TestFunction


def _require_pressure(ensemble: Ensemble) -> None:
    if not ensemble.has_pressure:
        raise MissingPressureError("operation requires members with pressure")


def _time_factors(ensemble: Ensemble, phi: TestFunction, t_window):
    """(sum w_t theta'(t_s) f_s, sum w_t theta(t_s) f_s) accumulators.

    Returns per-snapshot weight arrays (w_dt, w_val); steady members may
    collapse them to their sums.
    """
    times = ensemble.times
    wt = time_weights(times, t_window)
    if times.size == 1:
        return np.array([0.0]), np.array([1.0])
    t0, t1 = float(times[0]), float(times[-1])
    ta, tb = phi.t_support
    if ta < t0 - 1e-12 or tb > t1 + 1e-12:
        raise ValueError(
            f"test support ({ta}, {tb}) exceeds data range ({t0}, {t1})")
    return wt * phi.theta_dt(times), wt * phi.theta(times)


def weak_residual_k1(ensemble: Ensemble, phi: TestFunction, i: int,
                     t_window=None) -> float:
    """Quadrature of the one-point hierarchy form for component i.

    int <nu^1, v^i> dphi/dt + <nu^1, v^i v> . grad phi + <nu^1, p> dphi/dx_i
    over space-time; near zero iff the data is weakly a statistical solution
    at resolution.
    """
    _require_pressure(ensemble)
    grid = ensemble.grid
    chi = phi.chi_on_grid(grid)
    dchi = phi.grad_chi_on_grid(grid)
    w_dt, w_val = _time_factors(ensemble, phi, t_window)
    hd = grid.cell_volume
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        if member.is_steady():
            passes = [(0, float(w_dt.sum()), float(w_val.sum()))]
        else:
            passes = [(s, float(w_dt[s]), float(w_val[s]))
                      for s in range(ensemble.times.size)]
        for s, a_dt, a_val in passes:
            v = member.velocity[s]
            p = member.pressure[s]
            mass = float((v[i] * chi).sum() * hd)
            vflux = sum(v[i] * v[c] * dchi[c] for c in range(grid.dim))
            pflux = p * dchi[i]
            flux = float((vflux + pflux).sum() * hd)
            total += w * (a_dt * mass + a_val * flux)
    return float(total)


def divfree_residual(ensemble: Ensemble, phi: TestFunction,
                     kappa=None, k: int = 1, t_window=None) -> float:
    """Quadrature of the divergence constraint for the k-point hierarchy.

    int grad phi(x_k) . <nu^k, kappa(v_1, ..., v_{k-1}) v_k> dx dt.  For
    k = 2, `kappa` maps a velocity snapshot (dim, n, ..., n) to a nodal
    scalar field (vectorized observable); the default is kappa == 1.
    """
    if k not in (1, 2):
        raise ValueError("divergence residual supports k in {1, 2}")
    grid = ensemble.grid
    dchi = phi.grad_chi_on_grid(grid)
    _, w_val = _time_factors(ensemble, phi, t_window)
    hd = grid.cell_volume
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        if member.is_steady():
            passes = [(0, float(w_val.sum()))]
        else:
            passes = [(s, float(w_val[s])) for s in range(ensemble.times.size)]
        for s, a_val in passes:
            v = member.velocity[s]
            gv = float(sum(dchi[c] * v[c] for c in range(grid.dim)).sum() * hd)
            if k == 1:
                total += w * a_val * gv
            else:
                obs = np.ones(grid.shape) if kappa is None else kappa(v)
                total += w * a_val * float(obs.sum() * hd) * gv
    return float(total)


def global_energy(ensemble: Ensemble, t: float) -> float:
    """int <nu^1_{t,x}, |v|^2>/2 dx at a snapshot time."""
    s = snapshot_index(ensemble, t)
    grid = ensemble.grid
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        total += w * grid.integrate((member.velocity[s] ** 2).sum(axis=0)) / 2.0
    return float(total)


@dataclass(frozen=True)
class BalanceBreakdown:
    """The five regularized balance terms and the split sub-terms.

    terms[0..4] are the time-derivative, cubic-gradient, cubic-transport,
    pressure-gradient and pressure-transport terms; sub_terms splits the
    first two as (A11, A12, A21, A22) with A1 = A11 + A12, A2 = A21 + A22,
    and A21 equal to the dissipation functional at the same radius.
    """

    terms: tuple[float, float, float, float, float]
    sub_terms: tuple[float, float, float, float]
    eps: float

    @property
    def sum(self) -> float:
        return float(np.sum(self.terms))

    def to_json(self) -> str:
        payload = {
            "eps": self.eps,
            "A1": self.terms[0], "A2": self.terms[1], "A3": self.terms[2],
            "A4": self.terms[3], "A5": self.terms[4],
            "A11": self.sub_terms[0], "A12": self.sub_terms[1],
            "A21": self.sub_terms[2], "A22": self.sub_terms[3],
            "sum": self.sum,
        }
        return json.dumps(payload, sort_keys=True)


def five_term_balance(ensemble: Ensemble, mol: Mollifier, psi: TestFunction,
                      t_window=None, threads: int | None = 1) -> BalanceBreakdown:
    """Evaluate each balance term by its own stencil quadrature.

    The change of variables z = x - y is realized as integer stencil
    offsets; every term is the grid quadrature of the displayed integrand
    with the sampled rho and grad-rho weights.
    """
    _require_pressure(ensemble)
    grid = ensemble.grid
    if mol.grid != grid:
        raise GridMismatchError("mollifier was built for a different grid")
    chi = psi.chi_on_grid(grid)
    dchi = psi.grad_chi_on_grid(grid)
    w_dt, w_val = _time_factors(ensemble, psi, t_window)
    hd2 = grid.cell_volume**2
    axes = tuple(range(1, grid.dim + 1))
    paxes = tuple(range(grid.dim))
    A = np.zeros(5)
    sub = np.zeros(4)

    for w, member in zip(ensemble.weights, ensemble.members):
        if member.is_steady():
            passes = [(0, float(w_dt.sum()), float(w_val.sum()))]
        else:
            passes = [(s, float(w_dt[s]), float(w_val[s]))
                      for s in range(ensemble.times.size)]
        for s, a_dt, a_val in passes:
            v = member.velocity[s]
            p = member.pressure[s]
            for z, rho_z, g in zip(mol.offsets, mol.rho, mol.grad_rho):
                zt = tuple(int(c) for c in z)
                vz = np.roll(v, zt, axis=axes)
                pz = np.roll(p, zt, axis=paxes)
                dv = v - vz
                dot = sum(v[c] * vz[c] for c in range(grid.dim))
                dv2 = (dv * dv).sum(axis=0)
                speed2 = (v * v).sum(axis=0) + (vz * vz).sum(axis=0)
                gdv = sum(g[c] * dv[c] for c in range(grid.dim))
                scale = w * hd2
                A[0] += scale * a_dt * rho_z * float((chi * dot).sum())
                A[1] += scale * a_val * float((chi * gdv * dot).sum())
                adv = sum(dchi[c] * v[c] for c in range(grid.dim))
                A[2] += scale * a_val * rho_z * float((adv * dot).sum())
                pr = sum(g[c] * (vz[c] * p - v[c] * pz) for c in range(grid.dim))
                A[3] += scale * a_val * float((chi * pr).sum())
                adz = sum(dchi[c] * vz[c] for c in range(grid.dim))
                A[4] += scale * a_val * rho_z * float((adz * p).sum())
                sub[0] += 0.5 * scale * a_dt * rho_z * float((chi * speed2).sum())
                sub[1] += -0.5 * scale * a_dt * rho_z * float((chi * dv2).sum())
                sub[2] += -0.5 * scale * a_val * float((chi * gdv * dv2).sum())
                sub[3] += 0.5 * scale * a_val * float((chi * gdv * speed2).sum())
    return BalanceBreakdown(terms=tuple(A), sub_terms=tuple(sub), eps=mol.eps)


def weak_residual_k2(ensemble: Ensemble, phi, i: int, j: int,
                     t_window=None) -> float:
    """Quadrature of the two-point hierarchy form for components (i, j).

    `phi` is either a `SeparableTwoPoint` (the double-domain quadrature
    factorizes member by member; refused above n = 128 in d = 2) or a
    `MollifierPairing` (the y-integral collapses to the local stencil sum).
    """
    _require_pressure(ensemble)
    if isinstance(phi, MollifierPairing):
        return _k2_mollifier(ensemble, phi, i, j, t_window)
    if isinstance(phi, SeparableTwoPoint):
        grid = ensemble.grid
        if grid.dim == 2 and grid.n > 128:
            raise CostGuardError(
                "full two-point quadrature refused above n=128 in d=2; "
                "use a mollifier pairing (local stencil sum)")
        return _k2_separable(ensemble, phi, i, j, t_window)
    raise TypeError("phi must be SeparableTwoPoint or MollifierPairing")


def _k2_separable(ensemble: Ensemble, phi: SeparableTwoPoint, i, j,
                  t_window) -> float:
    grid = ensemble.grid
    hd = grid.cell_volume
    chi_a = phi.phi_a.chi_on_grid(grid)
    dchi_a = phi.phi_a.grad_chi_on_grid(grid)
    chi_b = phi.phi_b.chi_on_grid(grid)
    dchi_b = phi.phi_b.grad_chi_on_grid(grid)
    times = ensemble.times
    wt = time_weights(times, t_window)
    if times.size == 1:
        w_dt = np.array([0.0])
        w_val = np.array([1.0])
    else:
        th_a, th_b = phi.phi_a.theta(times), phi.phi_b.theta(times)
        dth = (phi.phi_a.theta_dt(times) * th_b
               + th_a * phi.phi_b.theta_dt(times))
        w_dt, w_val = wt * dth, wt * th_a * th_b
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        if member.is_steady():
            passes = [(0, float(w_dt.sum()), float(w_val.sum()))]
        else:
            passes = [(s, float(w_dt[s]), float(w_val[s]))
                      for s in range(times.size)]
        for s, a_dt, a_val in passes:
            v = member.velocity[s]
            p = member.pressure[s]
            vi_a = float((v[i] * chi_a).sum() * hd)
            vj_b = float((v[j] * chi_b).sum() * hd)
            adv_a = float((v[i] * sum(v[c] * dchi_a[c] for c in range(grid.dim))).sum() * hd)
            adv_b = float((v[j] * sum(v[c] * dchi_b[c] for c in range(grid.dim))).sum() * hd)
            p_a = float((p * dchi_a[i]).sum() * hd)
            p_b = float((p * dchi_b[j]).sum() * hd)
            total += w * (a_dt * vi_a * vj_b
                          + a_val * (adv_a * vj_b + vi_a * adv_b
                                     + p_a * vj_b + vi_a * p_b))
    return float(total)


def _k2_mollifier(ensemble: Ensemble, phi: MollifierPairing, i, j,
                  t_window) -> float:
    grid = ensemble.grid
    mol, psi = phi.mollifier, phi.psi
    if mol.grid != grid:
        raise GridMismatchError("mollifier was built for a different grid")
    chi = psi.chi_on_grid(grid)
    dchi = psi.grad_chi_on_grid(grid)
    w_dt, w_val = _time_factors(ensemble, psi, t_window)
    hd2 = grid.cell_volume**2
    axes = tuple(range(1, grid.dim + 1))
    paxes = tuple(range(grid.dim))
    total = 0.0
    for w, member in zip(ensemble.weights, ensemble.members):
        if member.is_steady():
            passes = [(0, float(w_dt.sum()), float(w_val.sum()))]
        else:
            passes = [(s, float(w_dt[s]), float(w_val[s]))
                      for s in range(ensemble.times.size)]
        for s, a_dt, a_val in passes:
            v = member.velocity[s]
            p = member.pressure[s]
            for z, rho_z, g in zip(mol.offsets, mol.rho, mol.grad_rho):
                zt = tuple(int(c) for c in z)
                vz = np.roll(v, zt, axis=axes)
                pz = np.roll(p, zt, axis=paxes)
                pair = v[i] * vz[j]
                scale = w * hd2
                # d/dt term
                total += scale * a_dt * rho_z * float((chi * pair).sum())
                # grad_x phi = psi grad_rho + rho theta grad_chi, against v1
                gv = sum(g[c] * v[c] for c in range(grid.dim))
                adv = sum(dchi[c] * v[c] for c in range(grid.dim))
                total += scale * a_val * float((pair * (chi * gv + rho_z * adv)).sum())
                # grad_y phi = -psi grad_rho, against v2
                gvz = sum(g[c] * vz[c] for c in range(grid.dim))
                total += -scale * a_val * float((pair * chi * gvz).sum())
                # pressure terms
                total += scale * a_val * float(
                    (vz[j] * p * (chi * g[i] + rho_z * dchi[i])).sum())
                total += -scale * a_val * float((v[i] * pz * chi * g[j]).sum())
    return float(total)


def local_energy_residual(ensemble: Ensemble, eps_ladder, psi: TestFunction,
                          profile: str = "bump", t_window=None,
                          threads: int | None = 1) -> list[dict]:
    """Per-radius defect of the regularized local energy identity.

    For each radius: the weak form of the energy-balance left side in its
    mollified two-point representation, minus the dissipation functional at
    the same radius.  Algebraically this equals minus the five-term balance
    sum, so the series sits at the quadrature floor for statistical
    solutions; each entry reports (eps, lhs_weak, e_eps, residual).
    """
    grid = ensemble.grid
    out = []
    for eps in sorted(set(float(e) for e in eps_ladder), reverse=True):
        mol = make_mollifier(grid, eps, profile)
        bd = five_term_balance(ensemble, mol, psi, t_window=t_window,
                               threads=threads)
        a1, a22 = bd.terms[0], bd.sub_terms[3]
        lhs_weak = -(a1 + a22 + bd.terms[2] + bd.terms[3] + bd.terms[4])
        e_eps = dissipation_eps(ensemble, mol, psi, t_window=t_window,
                                threads=threads)
        out.append({
            "eps": eps,
            "lhs_weak": lhs_weak,
            "e_eps": e_eps,
            "residual": lhs_weak - e_eps,
        })
    return out

"""Explicit three-point finite-volume scheme on a uniform 1D grid.

Forward-Euler updates with one flux evaluation per interface, periodic or
transmissive boundaries, and per-step audits of the structural properties
the fluxes guarantee: conservation, admissibility, the mass-fraction
maximum principle, the specific-entropy minimum principle, and (optionally)
the cell entropy inequality with the scheme's numerical entropy flux.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import flux as flux_mod
from . import thermo
from .flux import FluxScheme
from .thermo import AdmissibilityError, SpeciesSet

BOUNDARIES = ("periodic", "transmissive")


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid with n_cells cells of width dx starting at x0."""

    n_cells: int
    dx: float
    boundary: str = "transmissive"
    x0: float = 0.0

    def __post_init__(self):
        if self.n_cells < 3:
            raise ValueError("need at least 3 cells")
        if self.dx <= 0.0:
            raise ValueError("dx must be positive")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")

    @property
    def centers(self) -> np.ndarray:
        return self.x0 + self.dx * (np.arange(self.n_cells) + 0.5)

    @property
    def length(self) -> float:
        return self.n_cells * self.dx


@dataclass(frozen=True)
class StepReport:
    """Diagnostics of one explicit step."""

    dt: float
    totals: np.ndarray                 # dx * sum of each conserved component
    total_entropy: float               # dx * sum of eta
    min_specific_entropy: float
    Y_bounds: np.ndarray               # (n_species, 2) min/max
    admissible: bool
    max_principle_violation: float = 0.0
    entropy_min_violation: float = 0.0
    entropy_cell_residual: float | None = None


def _interface_states(states: np.ndarray, grid: Grid1D):
    """Left/right states of every interface, plus the flux-difference
    index map: cell j is updated by h[j+1] - h[j] (transmissive) or by
    h[(j+1) % N] - h[j] with wraparound (periodic)."""
    if grid.boundary == "periodic":
        u_l = states
        u_r = np.roll(states, -1, axis=1)
    else:
        u_l = np.concatenate([states[:, :1], states], axis=1)
        u_r = np.concatenate([states, states[:, -1:]], axis=1)
    return u_l, u_r


def cfl_dt(states, dx: float, scheme: FluxScheme, cfl: float = 0.5,
           species: SpeciesSet | None = None, dim: int = 1,
           boundary: str = "transmissive") -> float:
    """Largest stable time step: cfl * dx over the maximal wave speed.

    The wave-speed bound is the scheme's own estimate maximized over all
    consecutive interface pairs (equal-state pairs at the boundary ghosts).
    """
    if species is None:
        raise TypeError("species is required")
    grid = Grid1D(states.shape[1], dx, boundary)
    u_l, u_r = _interface_states(states, grid)
    n = np.ones((1,) + u_l.shape[1:])
    lam = flux_mod.wave_speed_bound(u_l, u_r, n, species, dim, scheme)
    return cfl * dx / float(np.max(lam))


def step(states, grid: Grid1D, scheme: FluxScheme, dt: float,
         species: SpeciesSet, audit: bool = True,
         entropy_audit: bool = False):
    """One forward-Euler update; returns (new_states, StepReport).

    Each interface flux is computed once and reused by both adjacent cells,
    so periodic totals telescope exactly.  Raises
    :class:`~relaxfv.thermo.AdmissibilityError` naming the first bad cell if
    the update leaves the admissible set (cannot occur under the CFL bound).
    """
    states = np.asarray(states, dtype=float)
    u_l, u_r = _interface_states(states, grid)
    normal = np.ones((1,) + u_l.shape[1:])
    out = flux_mod.numerical_flux(u_l, u_r, normal, species, 1, scheme,
                                  with_entropy=entropy_audit)
    h = out.flux
    if grid.boundary == "periodic":
        dh = h - np.roll(h, 1, axis=1)
    else:
        dh = h[:, 1:] - h[:, :-1]
    new_states = states - (dt / grid.dx) * dh

    ok = thermo.is_admissible(new_states, species, 1)
    if not np.all(ok):
        bad = int(np.argmin(ok))
        raise AdmissibilityError(
            f"cell {bad} left the admissible set after the update "
            f"(state {new_states[:, bad]})")

    report = _build_report(states, new_states, grid, scheme, species, dt,
                           out.entropy_flux, audit)
    return new_states, report


def _stencil_minmax(values: np.ndarray, boundary: str):
    """Per-cell min/max over the three-point stencil along the last axis."""
    if boundary == "periodic":
        left = np.roll(values, 1, axis=-1)
        right = np.roll(values, -1, axis=-1)
    else:
        left = np.concatenate([values[..., :1], values[..., :-1]], axis=-1)
        right = np.concatenate([values[..., 1:], values[..., -1:]], axis=-1)
    return (np.minimum(np.minimum(left, values), right),
            np.maximum(np.maximum(left, values), right))


def _build_report(states, new_states, grid, scheme, species, dt,
                  q_flux, audit: bool) -> StepReport:
    totals = grid.dx * new_states.sum(axis=1)
    if not audit:
        return StepReport(dt=dt, totals=totals, total_entropy=np.nan,
                          min_specific_entropy=np.nan,
                          Y_bounds=np.zeros((species.n_species, 2)),
                          admissible=True)
    s_old = thermo.specific_entropy_of(states, species, 1)
    s_new = thermo.specific_entropy_of(new_states, species, 1)
    rho_new = new_states[:species.n_species].sum(axis=0)
    eta_new = -rho_new * s_new

    Y_new = new_states[:species.n_species] / rho_new
    Y_old = states[:species.n_species] / states[:species.n_species].sum(axis=0)
    lo, hi = _stencil_minmax(Y_old, grid.boundary)
    max_viol = float(np.max(np.maximum(lo - Y_new, Y_new - hi).clip(min=0.0)))

    s_lo, _ = _stencil_minmax(s_old, grid.boundary)
    s_scale = np.maximum(np.abs(s_lo), 1.0)
    ent_viol = float(np.max(((s_lo - s_new) / s_scale).clip(min=0.0)))

    cell_residual = None
    if q_flux is not None:
        rho_old = states[:species.n_species].sum(axis=0)
        eta_old = -rho_old * s_old
        if grid.boundary == "periodic":
            q_r, q_l = q_flux, np.roll(q_flux, 1)
        else:
            q_r, q_l = q_flux[1:], q_flux[:-1]
        residual = eta_new - eta_old + (dt / grid.dx) * (q_r - q_l)
        scale = (np.abs(eta_new) + np.abs(eta_old)
                 + (dt / grid.dx) * (np.abs(q_r) + np.abs(q_l)))
        cell_residual = float(np.max(residual / np.maximum(scale, 1e-300)))

    return StepReport(
        dt=dt,
        totals=totals,
        total_entropy=float(grid.dx * eta_new.sum()),
        min_specific_entropy=float(s_new.min()),
        Y_bounds=np.stack([Y_new.min(axis=1), Y_new.max(axis=1)], axis=1),
        admissible=True,
        max_principle_violation=max_viol,
        entropy_min_violation=ent_viol,
        entropy_cell_residual=cell_residual,
    )


def run(initial, grid: Grid1D, scheme: FluxScheme, t_end: float,
        species: SpeciesSet, cfl: float = 0.5, audit: bool = True,
        entropy_audit: bool = False, max_steps: int = 10_000_000,
        on_step=None):
    """March from t=0 to t_end; returns (final states, list of StepReports).

    The last step is clipped to land exactly on t_end.  *on_step* gets
    (t, states, report) after every update.
    """
    states = np.asarray(initial, dtype=float)
    reports: list[StepReport] = []
    t = 0.0
    for _ in range(max_steps):
        if t >= t_end:
            break
        dt = cfl_dt(states, grid.dx, scheme, cfl, species=species,
                    boundary=grid.boundary)
        dt = min(dt, t_end - t)
        states, rep = step(states, grid, scheme, dt, species, audit=audit,
                           entropy_audit=entropy_audit)
        t += dt
        reports.append(rep)
        if on_step is not None:
            on_step(t, states, rep)
    else:
        raise RuntimeError(f"did not reach t_end={t_end} in {max_steps} steps")
    return states, reports


def write_csv(path, grid: Grid1D, states, species: SpeciesSet) -> None:
    """Write the cell profile: x,rho,u,p,T,gamma_mix,Y_*,Tv_*,s."""
    prim = thermo.conserved_to_primitive(states, species, 1, check=False)
    g = thermo.gamma_mix(species, prim.Y, check=False)
    s = thermo.specific_entropy(species, prim.Y, 1.0 / prim.rho, prim.e_t,
                                prim.e_v)
    ns, nd = species.n_species, species.n_diatomic
    header = (["x", "rho", "u", "p", "T", "gamma_mix"]
              + [f"Y_{a + 1}" for a in range(ns)]
              + [f"Tv_{b + 1}" for b in range(nd)] + ["s"])
    cols = ([grid.centers, prim.rho, prim.v[0], prim.p, prim.T, g]
            + [prim.Y[a] for a in range(ns)]
            + [prim.Tv[b] for b in range(nd)] + [s])
    data = np.column_stack(cols)
    np.savetxt(path, data, delimiter=",", header=",".join(header),
               comments="", fmt="%.12g")

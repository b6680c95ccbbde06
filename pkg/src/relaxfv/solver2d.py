"""Unstructured 2D finite-volume driver.

Cell updates accumulate one flux per edge (interior edges computed once,
boundary edges closed by wall/symmetry, supersonic inflow/outflow rules),
with global or local time stepping, steady-state residual tracking, and
the same structural audits as the 1D driver evaluated on the edge-neighbor
stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import flux as flux_mod
from . import thermo
from .flux import FluxScheme
from .mesh import Mesh
from .thermo import AdmissibilityError, SpeciesSet


@dataclass
class Field2D:
    """States attached to the cells of a mesh (component-major)."""

    mesh: Mesh
    species: SpeciesSet
    states: np.ndarray

    def __post_init__(self):
        expected = (self.species.n_conserved(2), self.mesh.n_cells)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape != expected:
            raise ValueError(f"states must have shape {expected}, "
                             f"got {self.states.shape}")

    @classmethod
    def uniform(cls, mesh: Mesh, species: SpeciesSet, state: np.ndarray):
        state = np.asarray(state, dtype=float).reshape(-1, 1)
        return cls(mesh, species, np.repeat(state, mesh.n_cells, axis=1))


@dataclass(frozen=True)
class SteadyReport:
    """Residual snapshot of the pseudo-time iteration."""

    iteration: int
    residual_l2: np.ndarray     # one entry per conserved component
    residual_drop: float        # iteration-0 norm over current norm


def _gather(mesh: Mesh):
    """Index arrays for vectorized edge sweeps (built once per solve)."""
    inner = mesh.interior_edges
    groups = {}
    for tag in ("wall", "symmetry", "inflow", "outflow"):
        idx = mesh.edges_with_tag(tag)
        if len(idx):
            groups[tag] = idx
    return inner, groups


def boundary_flux(u_own, tag: str, n, freestream, species: SpeciesSet,
                  scheme: FluxScheme, with_entropy: bool = False):
    """Flux through boundary edges of one tag.

    wall/symmetry use the impermeability closure; inflow imposes the
    freestream (physical flux when supersonic, scheme flux against a
    freestream ghost otherwise); outflow extrapolates the interior state.
    """
    if tag in ("wall", "symmetry"):
        return flux_mod.wall_flux(u_own, n, species, 2, scheme)
    if tag == "outflow":
        f = flux_mod.physical_flux(u_own, n, species, 2)
        lam = flux_mod.wave_speed_bound(u_own, u_own, n, species, 2, scheme)
        q = None
        if with_entropy:
            _, q = thermo.entropy_pair(u_own, n, species, 2)
        return flux_mod.InterfaceFlux(flux=f, max_speed=lam, entropy_flux=q)
    if tag != "inflow":
        raise ValueError(f"unknown boundary tag {tag!r}")
    u_inf = np.broadcast_to(np.asarray(freestream, dtype=float)[:, None],
                            u_own.shape)
    prim = thermo.conserved_to_primitive(u_inf[:, :1], species, 2)
    c_inf = thermo.frozen_sound_speed(species, prim.Y, prim.e_t).item()
    vn_inf = (prim.v[:, 0:1] * np.asarray(n)).sum(axis=0)
    supersonic = vn_inf <= -c_inf
    if np.all(supersonic):
        f = flux_mod.physical_flux(u_inf, n, species, 2)
        lam = flux_mod.wave_speed_bound(u_inf, u_inf, n, species, 2, scheme)
        q = None
        if with_entropy:
            _, q = thermo.entropy_pair(u_inf, n, species, 2)
        return flux_mod.InterfaceFlux(flux=f, max_speed=lam, entropy_flux=q)
    out = flux_mod.numerical_flux(u_own, u_inf, n, species, 2, scheme,
                                  with_entropy=with_entropy)
    f_sup = flux_mod.physical_flux(u_inf, n, species, 2)
    fl = np.where(supersonic, f_sup, out.flux)
    q = None
    if with_entropy:
        _, q_sup = thermo.entropy_pair(u_inf, n, species, 2)
        q = np.where(supersonic, q_sup, out.entropy_flux)
    return flux_mod.InterfaceFlux(flux=fl, max_speed=out.max_speed,
                                  entropy_flux=q)


def _edge_speeds(field: Field2D, scheme: FluxScheme, freestream):
    """Wave-speed bound per edge, maximized over both sides."""
    mesh, sp = field.mesh, field.species
    lam = np.zeros(len(mesh.edge_length))
    inner, groups = _gather(mesh)
    if len(inner):
        own, neigh = mesh.edge_cells[inner, 0], mesh.edge_cells[inner, 1]
        n = mesh.edge_normal[inner].T
        lam[inner] = flux_mod.wave_speed_bound(
            field.states[:, own], field.states[:, neigh], n, sp, 2, scheme)
    for tag, idx in groups.items():
        own = mesh.edge_cells[idx, 0]
        n = mesh.edge_normal[idx].T
        u_own = field.states[:, own]
        if tag == "inflow" and freestream is not None:
            u_ghost = np.broadcast_to(
                np.asarray(freestream, dtype=float)[:, None], u_own.shape)
        else:
            u_ghost = u_own
        lam[idx] = flux_mod.wave_speed_bound(u_own, u_ghost, n, sp, 2, scheme)
    return lam


def cfl_dt_2d(field: Field2D, scheme: FluxScheme, cfl: float = 0.5,
              freestream=None, local: bool = False):
    """Stable time step: dt_k = cfl |k| / (|dk| max_e lambda_e).

    Returns the global minimum, or the per-cell array in local mode (for
    steady pseudo-time marching).
    """
    mesh = field.mesh
    lam = _edge_speeds(field, scheme, freestream)
    lam_cell = np.zeros(mesh.n_cells)
    np.maximum.at(lam_cell, mesh.edge_cells[:, 0], lam)
    inner = mesh.edge_cells[:, 1] >= 0
    np.maximum.at(lam_cell, mesh.edge_cells[inner, 1], lam[inner])
    dt_cell = cfl * mesh.cell_area / (mesh.cell_perimeter * lam_cell)
    return dt_cell if local else float(dt_cell.min())


def step_2d(field: Field2D, scheme: FluxScheme, dt, freestream=None,
            entropy_audit: bool = False):
    """One explicit update; dt may be a scalar or a per-cell array.

    Returns (new_states, info) with info carrying the edgewise entropy-flux
    audit residual when requested.  Raises on inadmissible output cells.
    """
    mesh, sp = field.mesh, field.species
    states = field.states
    inner, groups = _gather(mesh)
    accum = np.zeros_like(states)
    q_accum = np.zeros(mesh.n_cells) if entropy_audit else None

    if len(inner):
        own, neigh = mesh.edge_cells[inner, 0], mesh.edge_cells[inner, 1]
        n = mesh.edge_normal[inner].T
        out = flux_mod.numerical_flux(states[:, own], states[:, neigh], n,
                                      sp, 2, scheme, with_entropy=entropy_audit)
        weighted = mesh.edge_length[inner] * out.flux
        np.add.at(accum.T, own, weighted.T)
        np.add.at(accum.T, neigh, -weighted.T)
        if entropy_audit:
            qw = mesh.edge_length[inner] * out.entropy_flux
            np.add.at(q_accum, own, qw)
            np.add.at(q_accum, neigh, -qw)

    for tag, idx in groups.items():
        own = mesh.edge_cells[idx, 0]
        n = mesh.edge_normal[idx].T
        out = boundary_flux(states[:, own], tag, n, freestream, sp, scheme,
                            with_entropy=entropy_audit)
        weighted = mesh.edge_length[idx] * out.flux
        np.add.at(accum.T, own, weighted.T)
        if entropy_audit:
            np.add.at(q_accum, own, mesh.edge_length[idx] * out.entropy_flux)

    dt_over_area = np.asarray(dt) / mesh.cell_area
    new_states = states - dt_over_area * accum

    ok = thermo.is_admissible(new_states, sp, 2)
    if not np.all(ok):
        bad = int(np.argmin(ok))
        raise AdmissibilityError(
            f"cell {bad} at {field.mesh.cell_centroid[bad]} left the "
            f"admissible set")

    info = {}
    if entropy_audit:
        eta_old = thermo.entropy(states, sp, 2)
        eta_new = thermo.entropy(new_states, sp, 2)
        residual = eta_new - eta_old + dt_over_area * q_accum
        scale = (np.abs(eta_new) + np.abs(eta_old)
                 + dt_over_area * np.abs(q_accum))
        info["entropy_cell_residual"] = float(
            np.max(residual / np.maximum(scale, 1e-300)))
    return new_states, info


def stencil_audit(field: Field2D, new_states, freestream=None):
    """Mass-fraction max principle and entropy minimum over the edge stencil.

    Returns (max_fraction_violation, entropy_min_violation); the stencil of
    a cell is itself, its edge neighbors, and the freestream ghost along
    inflow edges (wall/symmetry/outflow ghosts replicate the cell).
    """
    mesh, sp = field.mesh, field.species
    ns = sp.n_species
    rho = field.states[:ns].sum(axis=0)
    Y = field.states[:ns] / rho
    s = thermo.specific_entropy_of(field.states, sp, 2)

    Y_lo, Y_hi = Y.copy(), Y.copy()
    s_lo = s.copy()
    inner = mesh.interior_edges
    own, neigh = mesh.edge_cells[inner, 0], mesh.edge_cells[inner, 1]
    for a in range(ns):
        np.minimum.at(Y_lo[a], own, Y[a, neigh])
        np.minimum.at(Y_lo[a], neigh, Y[a, own])
        np.maximum.at(Y_hi[a], own, Y[a, neigh])
        np.maximum.at(Y_hi[a], neigh, Y[a, own])
    np.minimum.at(s_lo, own, s[neigh])
    np.minimum.at(s_lo, neigh, s[own])
    if freestream is not None:
        idx = mesh.edges_with_tag("inflow")
        if len(idx):
            own_b = mesh.edge_cells[idx, 0]
            u_inf = np.asarray(freestream, dtype=float)
            Y_inf = u_inf[:ns] / u_inf[:ns].sum()
            s_inf = float(thermo.specific_entropy_of(u_inf, sp, 2))
            for a in range(ns):
                np.minimum.at(Y_lo[a], own_b, Y_inf[a])
                np.maximum.at(Y_hi[a], own_b, Y_inf[a])
            np.minimum.at(s_lo, own_b, s_inf)

    rho_new = new_states[:ns].sum(axis=0)
    Y_new = new_states[:ns] / rho_new
    s_new = thermo.specific_entropy_of(new_states, sp, 2)
    y_viol = float(np.max(np.maximum(Y_lo - Y_new, Y_new - Y_hi).clip(min=0.0)))
    s_scale = np.maximum(np.abs(s_lo), 1.0)
    s_viol = float(np.max(((s_lo - s_new) / s_scale).clip(min=0.0)))
    return y_viol, s_viol


def solve_steady(field: Field2D, scheme: FluxScheme, freestream,
                 target_drop: float = 1e4, max_iter: int = 50_000,
                 cfl: float = 0.5, audit_every: int = 0,
                 record_every: int = 25, on_iteration=None):
    """Local-time-stepping pseudo-time march to a steady state.

    Stops when the l2 norm of (U' - U)/dt_k has dropped by *target_drop*
    in every conserved component (relative to the first iteration), or at
    *max_iter*.  Returns (field, [SteadyReport...]); audits (admissibility,
    stencil principles) run every *audit_every* iterations when nonzero and
    raise on violation beyond round-off.
    """
    reports: list[SteadyReport] = []
    ns = field.species.n_species
    r0 = None
    best_drop = 0.0
    for it in range(1, max_iter + 1):
        dt_cell = cfl_dt_2d(field, scheme, cfl, freestream, local=True)
        new_states, _ = step_2d(field, scheme, dt_cell, freestream)
        resid = np.sqrt((((new_states - field.states) / dt_cell) ** 2).sum(axis=1))
        # Components at round-off of their physical group's magnitude count
        # as converged (species share the mixture density scale, momentum
        # components the momentum magnitude, energies the total energy).
        rho_scale = np.sqrt(((field.states[:ns].sum(axis=0) / dt_cell) ** 2).sum())
        mom_scale = np.sqrt(((field.states[ns:ns + 2] / dt_cell) ** 2).sum())
        e_scale = np.sqrt(((field.states[ns + 2] / dt_cell) ** 2).sum())
        floor = 1e-12 * np.concatenate([
            np.full(ns, rho_scale), np.full(2, mom_scale),
            np.full(1 + field.species.n_diatomic, e_scale)])
        if r0 is None:
            r0 = np.maximum(resid, 1e-300)
        ratios = np.where(resid <= floor, np.inf,
                          r0 / np.maximum(resid, 1e-300))
        drop = float(np.min(ratios))
        # The reported drop is monotone-smoothed; raw residuals may wiggle.
        best_drop = max(best_drop, drop)
        if audit_every and it % audit_every == 0:
            y_viol, s_viol = stencil_audit(field, new_states, freestream)
            if y_viol > 1e-12:
                raise AssertionError(
                    f"mass-fraction principle violated by {y_viol:.3e}")
            if s_viol > 1e-10:
                raise AssertionError(
                    f"entropy minimum principle violated by {s_viol:.3e}")
        field.states = new_states
        if it % record_every == 0 or best_drop >= target_drop or it == max_iter:
            reports.append(SteadyReport(iteration=it, residual_l2=resid,
                                        residual_drop=best_drop))
        if on_iteration is not None:
            on_iteration(it, field, best_drop)
        if best_drop >= target_drop:
            break
    return field, reports


def stagnation_line_cells(mesh: Mesh) -> np.ndarray:
    """Cells adjacent to the y = 0 symmetry line upstream of the body,
    ordered from the far field toward the wall (increasing x)."""
    scale = np.abs(mesh.vertices).max()
    on_axis = np.abs(mesh.vertices[:, 1]) <= 1e-9 * scale
    rows = []
    for ic, cell in enumerate(mesh.cells):
        touching = sum(bool(on_axis[v]) for v in cell)
        if touching >= 2 and mesh.cell_centroid[ic, 0] < 0.0:
            rows.append(ic)
    idx = np.array(rows, dtype=int)
    return idx[np.argsort(mesh.cell_centroid[idx, 0])]


def shock_standoff(field: Field2D, freestream=None):
    """Distance from the body to the bow shock along the symmetry line.

    The shock is located where the pressure first crosses the midpoint
    between the freestream value and the post-shock plateau (the maximum
    along the line), with linear interpolation between cell centers.
    Returns None when there is no crossing (no shock).
    """
    mesh, sp = field.mesh, field.species
    cells = stagnation_line_cells(mesh)
    if len(cells) < 3:
        raise ValueError("no stagnation-line cells found on y = 0, x < 0")
    prim = thermo.conserved_to_primitive(field.states[:, cells], sp, 2,
                                         check=False)
    x = mesh.cell_centroid[cells, 0]
    p = prim.p
    if freestream is not None:
        prim_inf = thermo.conserved_to_primitive(
            np.asarray(freestream, dtype=float), sp, 2)
        p_inf = float(prim_inf.p)
    else:
        p_inf = float(p[0])
    plateau = float(p.max())
    if plateau <= 2.0 * p_inf:
        return None
    midpoint = 0.5 * (p_inf + plateau)
    cross = np.nonzero((p[:-1] < midpoint) & (p[1:] >= midpoint))[0]
    if len(cross) == 0:
        return None
    k = int(cross[0])
    frac = (midpoint - p[k]) / (p[k + 1] - p[k])
    x_shock = x[k] + frac * (x[k + 1] - x[k])

    # Wall intersection with the symmetry line: innermost wall-edge vertex.
    wall = mesh.edges_with_tag("wall")
    scale = np.abs(mesh.vertices).max()
    x_wall = None
    for ie in wall:
        for v in mesh.edge_vertices[ie]:
            if abs(mesh.vertices[v, 1]) <= 1e-9 * scale:
                xv = mesh.vertices[v, 0]
                x_wall = xv if x_wall is None else max(x_wall, xv)
    if x_wall is None:
        x_wall = float(x[-1])
    return float(x_wall - x_shock)


def cell_primitive_arrays(field: Field2D) -> dict:
    """Named cell arrays (rho, p, T, Mach, Y_*, Tv_*) for VTK export."""
    sp = field.species
    prim = thermo.conserved_to_primitive(field.states, sp, 2, check=False)
    c = thermo.frozen_sound_speed(sp, prim.Y, prim.e_t)
    speed = np.sqrt((prim.v ** 2).sum(axis=0))
    data = {"rho": prim.rho, "p": prim.p, "T": prim.T, "Mach": speed / c,
            "u": prim.v[0], "v": prim.v[1]}
    for a, name in enumerate(sp.names):
        data[f"Y_{name}"] = prim.Y[a]
    for b in range(sp.n_diatomic):
        data[f"Tv_{sp.names[b]}"] = prim.Tv[b]
    return data

"""Ready-made configurations for the bundled validation cases.

Two shock-tube problems (material-interface convection and a high-ratio
air shock tube), and two steady hypersonic flows (blunt body at Mach 15.3
and a 25/55-degree double cone at Mach 11.3).  The 1D cases are
nondimensional and the solver is unit-agnostic; the 2D cases use SI
freestream data.  The blunt-body case is run as planar flow over a
circular cylinder section, so absolute shock positions are not comparable
to axisymmetric data; its acceptance rests on grid-convergence trends.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import mesh as mesh_mod
from . import riemann, thermo
from .flux import FluxScheme
from .mesh import Mesh
from .solver1d import Grid1D
from .thermo import PrimitiveState, Species, SpeciesSet


@dataclass(frozen=True)
class Run1DConfig:
    """Shock-tube style run: initial profile marched to t_end."""

    name: str
    species: SpeciesSet
    n_cells: int
    x_span: tuple[float, float]
    boundary: str
    t_end: float
    initial: Callable[[np.ndarray], np.ndarray]
    exact_primitive: Callable[[np.ndarray, float], tuple] | None = None
    scheme: FluxScheme = field(default_factory=FluxScheme.hll)
    cfl: float = 0.5
    output_times: tuple[float, ...] = ()
    seed: int = 0

    def grid(self) -> Grid1D:
        x0, x1 = self.x_span
        return Grid1D(self.n_cells, (x1 - x0) / self.n_cells, self.boundary, x0)

    def initial_states(self) -> np.ndarray:
        return self.initial(self.grid().centers)


@dataclass(frozen=True)
class Run2DConfig:
    """Steady external-flow run: freestream-initialized pseudo-time march."""

    name: str
    species: SpeciesSet
    mesh_factory: Callable[[], Mesh]
    freestream: np.ndarray
    target_drop: float = 1e4
    max_iter: int = 50_000
    scheme: FluxScheme = field(default_factory=FluxScheme.hll)
    cfl: float = 0.5
    seed: int = 0

    def mesh(self) -> Mesh:
        return self.mesh_factory()


def freestream_state(species: SpeciesSet, Y, rho: float, T: float,
                     mach: float, Tv=None, direction=(1.0, 0.0),
                     dim: int = 2) -> np.ndarray:
    """Conserved freestream vector from (Y, rho, T, Mach) with vibration
    temperatures Tv (defaults to T for every diatomic species)."""
    Y = np.asarray(Y, dtype=float)
    nd = species.n_diatomic
    e_t = float(thermo.cv_tr_mix(species, Y) * T)
    c = float(thermo.frozen_sound_speed(species, Y, e_t))
    if Tv is None:
        Tv = [T] * nd
    e_v = np.array([float(thermo.vib_energy(species, b, Tv[b]))
                    for b in range(nd)])
    direction = np.asarray(direction, dtype=float)[:dim]
    direction = direction / np.hypot(*direction) if dim == 2 else direction
    prim = PrimitiveState(Y=Y, rho=float(rho), v=mach * c * direction,
                          e_t=e_t, e_v=e_v, p=None, T=None, Tv=None)
    return thermo.primitive_to_conserved(prim, species, dim)


# -- 1D cases -----------------------------------------------------------------


def case_material_interface(n_cells: int = 100,
                            scheme: FluxScheme | None = None) -> Run1DConfig:
    """Convection of a material interface at speed 1 and pressure 1.

    Diatomic gas (gamma 1.4, in vibrational disequilibrium) on the left,
    monoatomic helium on the right; the interface starts at x = 0.25 and
    the exact solution is the advected initial profile.  Nondimensional
    units; the bundled N2 constants stand in for the diatomic gas (the
    vibration scale only affects reported vibration temperatures, not the
    dynamics).
    """
    mix = SpeciesSet.bundled(["N2", "He"])
    rho_l, rho_r = 3.607655, 0.5
    e_v_l = 1.8070291
    u0, p0, x_jump = 1.0, 1.0, 0.25

    def initial(x: np.ndarray) -> np.ndarray:
        n = x.size
        left = x < x_jump
        Y = np.where(left, 1.0, 0.0)
        rho = np.where(left, rho_l, rho_r)
        gamma = np.where(left, 1.4, 5.0 / 3.0)
        e_t = p0 / ((gamma - 1.0) * rho)
        prim = PrimitiveState(
            Y=np.stack([Y, 1.0 - Y]), rho=rho,
            v=np.full((1, n), u0), e_t=e_t,
            e_v=np.where(left, e_v_l, 0.0)[None], p=None, T=None, Tv=None)
        return thermo.primitive_to_conserved(prim, mix, 1)

    def exact_primitive(x: np.ndarray, t: float):
        states = initial(np.asarray(x) - u0 * t)
        prim = thermo.conserved_to_primitive(states, mix, 1, check=False)
        return prim.rho, prim.v[0], prim.p

    return Run1DConfig(
        name="material_interface", species=mix, n_cells=n_cells,
        x_span=(0.0, 1.0), boundary="transmissive", t_end=0.5,
        initial=initial, exact_primitive=exact_primitive,
        scheme=scheme or FluxScheme.hll())


AIR5_NAMES = ("N2", "O2", "NO", "N", "O")
AIR5_FRACTIONS = (0.7543, 0.2283, 0.01026, 6.5e-7, 0.00713)


def air5_species(zero_enthalpy: bool = True) -> SpeciesSet:
    """The 5-species air mixture, optionally with formation enthalpies
    zeroed (the shock-tube case neglects them)."""
    base = SpeciesSet.bundled(AIR5_NAMES)
    if not zero_enthalpy:
        return base
    return SpeciesSet.from_species([replace(sp, h0=0.0) for sp in base.species])


def air5_composition(species: SpeciesSet) -> np.ndarray:
    Y = np.zeros(species.n_species)
    for name, y in zip(AIR5_NAMES, AIR5_FRACTIONS):
        Y[species.index(name)] = y
    return Y / Y.sum()


def case_air_shock_tube(n_cells: int = 100,
                        scheme: FluxScheme | None = None) -> Run1DConfig:
    """Air shock tube with pressure ratio 100 and temperature ratio 30.

    Uniform 5-species composition in thermal equilibrium, formation
    enthalpies neglected, p_L = 100 bar at 9000 K against p_R = 1 bar at
    300 K on [0, 1] m with the diaphragm at 0.5 m, run to t = 1.5e-4 s.
    With uniform composition the (rho, u, p) dynamics reduce to a
    polytropic gas at the equivalent exponent gamma(Y) = 1.402, which
    provides the exact reference.
    """
    mix = air5_species(zero_enthalpy=True)
    Y = air5_composition(mix)
    p_l, p_r = 100e5, 1e5
    T_l, T_r = 9000.0, 300.0
    r = float(thermo.gas_constant_mix(mix, Y))
    cvt = float(thermo.cv_tr_mix(mix, Y))
    gamma_y = float(thermo.gamma_mix(mix, Y))
    rho_l, rho_r = p_l / (r * T_l), p_r / (r * T_r)
    x_jump = 0.5

    def one_side(p, T, n):
        e_v = np.array([float(thermo.vib_energy(mix, b, T))
                        for b in range(mix.n_diatomic)])
        prim = PrimitiveState(
            Y=np.repeat(Y[:, None], n, axis=1), rho=np.full(n, p / (r * T)),
            v=np.zeros((1, n)), e_t=np.full(n, cvt * T),
            e_v=np.repeat(e_v[:, None], n, axis=1), p=None, T=None, Tv=None)
        return thermo.primitive_to_conserved(prim, mix, 1)

    def initial(x: np.ndarray) -> np.ndarray:
        n = x.size
        states = np.empty((mix.n_conserved(1), n))
        left = x < x_jump
        states[:, left] = one_side(p_l, T_l, int(left.sum()))
        states[:, ~left] = one_side(p_r, T_r, int((~left).sum()))
        return states

    def exact_primitive(x: np.ndarray, t: float):
        side_l = riemann.PolytropicSide(rho_l, 0.0, p_l, gamma_y)
        side_r = riemann.PolytropicSide(rho_r, 0.0, p_r, gamma_y)
        p_star, u_star = riemann.exact_star(side_l, side_r)
        xi = (np.asarray(x, dtype=float) - x_jump) / t
        return riemann.sample_fan(side_l, side_r, p_star, u_star, xi=xi)

    return Run1DConfig(
        name="air_shock_tube", species=mix, n_cells=n_cells,
        x_span=(0.0, 1.0), boundary="transmissive", t_end=1.5e-4,
        initial=initial, exact_primitive=exact_primitive,
        scheme=scheme or FluxScheme.hll())


# -- 2D cases -----------------------------------------------------------------

INCH = 0.0254


def case_sphere(n: int = 20, scheme: FluxScheme | None = None,
                target_drop: float = 1e4) -> Run2DConfig:
    """Hypersonic blunt-body flow at Mach 15.3 (planar cylinder section).

    Quarter-inch diameter body, freestream density 7.83e-3 kg/m3 at 293 K,
    79/21 nitrogen/oxygen by mass, vibration temperatures in equilibrium
    with the freestream.  The n x n body-fitted grid spans the upstream
    half of the body; symmetry along y = 0.
    """
    mix = SpeciesSet.bundled(["N2", "O2"])
    Y = np.array([0.79, 0.21])
    radius = 0.25 * INCH / 2.0
    inf = freestream_state(mix, Y, rho=7.83e-3, T=293.0, mach=15.3)

    def factory(n=n, radius=radius):
        return mesh_mod.gen_cylinder_ogrid(n, n, radius,
                                           outer_radius=3.0 * radius)

    return Run2DConfig(
        name="sphere", species=mix, mesh_factory=factory, freestream=inf,
        target_drop=target_drop, scheme=scheme or FluxScheme.hll())


def case_double_cone(level: int = 0, scheme: FluxScheme | None = None,
                     target_drop: float = 1e4) -> Run2DConfig:
    """Hypersonic 25/55-degree double cone at Mach 11.3.

    99% molecular / 1% atomic nitrogen by mass, freestream 1.34e-3 kg/m3
    at 303 K with the N2 vibration temperature frozen at 3085 K.  *level*
    selects a mesh from the refinement series (0 = coarsest).  The cone
    lengths are not part of the published data; the defaults reproduce the
    geometry's aspect only.
    """
    mix = SpeciesSet.bundled(["N2", "N"])
    Y = np.array([0.99, 0.01])
    inf = freestream_state(mix, Y, rho=1.34e-3, T=303.0, mach=11.3,
                           Tv=[3085.0])

    def factory(level=level):
        res = int(round(30 * 1.5 ** level))
        return mesh_mod.gen_double_cone(resolution=res)

    return Run2DConfig(
        name="double_cone", species=mix, mesh_factory=factory,
        freestream=inf, target_drop=target_drop,
        scheme=scheme or FluxScheme.hll())


CASES_1D = {"material_interface": case_material_interface,
            "air_shock_tube": case_air_shock_tube}
CASES_2D = {"sphere": case_sphere, "double_cone": case_double_cone}

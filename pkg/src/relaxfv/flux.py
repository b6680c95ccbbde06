"""Multicomponent numerical fluxes built from polytropic-gas Riemann solvers.

Every flux here is the lift of a flux for the relaxed system evaluated on
equilibrium-projected data: the species, momentum and vibration rows are
taken verbatim and the total-energy row is reassembled from the polytropic
energy, remainder-energy, formation-enthalpy and vibration rows.  Because
the lift is linear, the resulting fluxes are consistent, conservative and
inherit entropy stability, positivity and the mass-fraction and entropy
minimum/maximum principles from the underlying polytropic scheme.

Normals may be single unit vectors of shape (d,) or batches (d, K);
states are component-major vectors as in :mod:`relaxfv.thermo`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import relax, riemann, thermo
from .relax import RelaxGamma, default_gamma
from .riemann import PolytropicSide
from .thermo import SpeciesSet

KINDS = ("godunov", "hll", "pressure_relax")
_DEFAULT_INFLATION = {"godunov": 1.0, "hll": 1.01, "pressure_relax": 1.01}


@dataclass(frozen=True)
class FluxScheme:
    """Selects a numerical flux and its wave-speed parameters.

    *gamma* is the relaxation exponent (> 5/3) used by the Godunov internal
    polytropic solve and by the HLL wave-speed estimates.  *speed_inflation*
    scales the wave-speed estimates of the two approximate solvers (the
    Lagrangian speeds for pressure relaxation); it defaults to 1.01 for those
    and 1.0 for Godunov.  *lagrangian_gamma* is the exponent used inside the
    Lagrangian sound-speed estimates of the pressure-relaxation solver.
    """

    kind: str
    gamma: RelaxGamma = field(default_factory=default_gamma)
    speed_inflation: float | None = None
    lagrangian_gamma: float = 5.0 / 3.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown flux kind {self.kind!r}, expected one of {KINDS}")
        if self.speed_inflation is None:
            object.__setattr__(self, "speed_inflation", _DEFAULT_INFLATION[self.kind])
        if self.speed_inflation < 1.0:
            raise ValueError("speed_inflation must be >= 1")

    @classmethod
    def godunov(cls, **kw) -> "FluxScheme":
        return cls("godunov", **kw)

    @classmethod
    def hll(cls, **kw) -> "FluxScheme":
        return cls("hll", **kw)

    @classmethod
    def pressure_relax(cls, **kw) -> "FluxScheme":
        return cls("pressure_relax", **kw)


class InterfaceFlux(NamedTuple):
    """Numerical flux through a unit interface plus CFL and entropy data."""

    flux: np.ndarray
    max_speed: np.ndarray
    entropy_flux: np.ndarray | None


class _Side(NamedTuple):
    rho: np.ndarray
    Y: np.ndarray
    un: np.ndarray       # normal velocity
    vperp: np.ndarray    # transverse velocity vector
    e_t: np.ndarray
    p: np.ndarray        # equilibrium mixture pressure
    E: np.ndarray        # total specific energy
    yev: np.ndarray      # rho_ev / rho, per diatomic species
    h0: np.ndarray       # mixture formation enthalpy
    gamma_y: np.ndarray  # mixture adiabatic exponent


def _prep_side(u, n, species: SpeciesSet, dim: int) -> _Side:
    rho, Y, v, e_t = thermo.e_t_from_conserved(u, species, dim, check=False)
    _, _, rhoE, rho_ev = thermo.split_conserved(u, species, dim)
    n = np.asarray(n)
    un = (v * n).sum(axis=0)
    vperp = v - un * n
    gamma_y = thermo.gamma_mix(species, Y, check=False)
    return _Side(rho=rho, Y=Y, un=un, vperp=vperp, e_t=e_t,
                 p=(gamma_y - 1.0) * rho * e_t, E=rhoE / rho,
                 yev=rho_ev / rho, h0=np.tensordot(species.h0, Y, axes=(0, 0)),
                 gamma_y=gamma_y)


def _side_flux(side: _Side, n, species: SpeciesSet) -> np.ndarray:
    """f(u).n assembled from prepared side quantities."""
    rho_un = side.rho * side.un
    return np.concatenate([
        side.Y * rho_un,
        rho_un * (side.un * np.asarray(n) + side.vperp) + side.p * np.asarray(n),
        ((side.rho * side.E + side.p) * side.un)[None],
        side.yev * rho_un,
    ], axis=0)


def physical_flux(u, n, species: SpeciesSet, dim: int) -> np.ndarray:
    """Normal physical flux f(u).n (re-exported for solver use)."""
    return thermo.physical_flux(u, n, species, dim)


def lift_flux(H, species: SpeciesSet, dim: int) -> np.ndarray:
    """Lift a relaxed-system flux to the equilibrium variables.

    The species, momentum and vibration rows are copied; the total-energy
    row is H_Er + H_es + sum_a h0_a H_rho_a + sum_b H_ev_b.
    """
    ns, nd = species.n_species, species.n_diatomic
    H = np.asarray(H)
    H_rho = H[:ns]
    H_mom = H[ns:ns + dim]
    H_Er = H[ns + dim]
    H_ev = H[ns + dim + 1:ns + dim + 1 + nd]
    H_es = H[ns + dim + 1 + nd]
    h_E = (H_Er + H_es + np.tensordot(species.h0, H_rho, axes=(0, 0))
           + H_ev.sum(axis=0))
    return np.concatenate([H_rho, H_mom, h_E[None], H_ev], axis=0)


def _pick(mask, a, b):
    return np.where(mask, a, b)


def godunov_flux(u_l, u_r, n, species: SpeciesSet, dim: int,
                 scheme: FluxScheme, with_entropy: bool = False) -> InterfaceFlux:
    """Exact-Riemann-solver flux on the equilibrium-projected data.

    The polytropic problem with exponent *scheme.gamma* is solved exactly
    for (rho, u, p) sampled on the interface ray; composition, transverse
    velocity, vibration energies and the remainder energy ride along as
    passive payloads upwinded by the sign of the contact speed.  (Keeping
    the remainder energy purely advected, rather than re-equilibrating it
    against the sampled polytropic energy, is what preserves the
    specific-entropy minimum principle; the two choices agree whenever the
    interface ray falls outside the star region.)
    """
    g = float(scheme.gamma)
    L = _prep_side(u_l, n, species, dim)
    R = _prep_side(u_r, n, species, dim)
    side_l = PolytropicSide(L.rho, L.un, L.p, g)
    side_r = PolytropicSide(R.rho, R.un, R.p, g)
    p_star, u_star = riemann.exact_star(side_l, side_r)
    rho0, u0, p0 = riemann.sample_fan(side_l, side_r, p_star, u_star, xi=0.0)

    up = u_star > 0.0
    Y_up = _pick(up, L.Y, R.Y)
    vperp_up = _pick(up, L.vperp, R.vperp)
    yev_up = _pick(up, L.yev, R.yev)
    gamma_up = _pick(up, L.gamma_y, R.gamma_y)
    # Equilibrium remainder energy of the upwind data, advected unchanged.
    e_s_up = (g - gamma_up) / (g - 1.0) * _pick(up, L.e_t, R.e_t)

    e_r0 = p0 / ((g - 1.0) * rho0)
    ke = 0.5 * ((vperp_up * vperp_up).sum(axis=0) + u0 * u0)
    rho_u0 = rho0 * u0
    n = np.asarray(n)
    H = np.concatenate([
        Y_up * rho_u0,
        rho_u0 * (u0 * n + vperp_up) + p0 * n,
        ((rho0 * (e_r0 + ke) + p0) * u0)[None],
        yev_up * rho_u0,
        (rho_u0 * e_s_up)[None],
    ], axis=0)
    flux = lift_flux(H, species, dim)

    c_l = np.sqrt(g * L.p / L.rho)
    c_r = np.sqrt(g * R.p / R.rho)
    max_speed = np.maximum(np.abs(L.un) + c_l, np.abs(R.un) + c_r)

    entropy_flux = None
    if with_entropy:
        # Entropy flux of the sampled interface state of the relaxed
        # system, with the advected entropy payload.
        ev_spec = _specific_ev(Y_up, yev_up, species)
        zeta0 = relax.zeta(species, Y_up, 1.0 / rho0, e_r0, e_s_up, ev_spec, g)
        entropy_flux = rho0 * zeta0 * u0
    return InterfaceFlux(flux=flux, max_speed=max_speed, entropy_flux=entropy_flux)


def _specific_ev(Y, yev, species: SpeciesSet):
    nd = species.n_diatomic
    if not nd:
        return yev
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(Y[:nd] > 0.0, yev / np.where(Y[:nd] > 0.0, Y[:nd], 1.0), 0.0)


def hll_flux(u_l, u_r, n, species: SpeciesSet, dim: int,
             scheme: FluxScheme, with_entropy: bool = False) -> InterfaceFlux:
    """Two-wave approximate solver applied directly to the lifted variables.

    By linearity of the lift, evaluating the three-branch formula on the
    equilibrium states and physical fluxes is identical to lifting the
    relaxed-system HLL flux.  Wave speeds come from the two-rarefaction
    bounds at the relaxation exponent, scaled by the inflation factor.
    """
    g = float(scheme.gamma)
    L = _prep_side(u_l, n, species, dim)
    R = _prep_side(u_r, n, species, dim)
    s_l, s_r = riemann.two_rarefaction_speeds(
        PolytropicSide(L.rho, L.un, L.p, g), PolytropicSide(R.rho, R.un, R.p, g))
    s_l = s_l * scheme.speed_inflation
    s_r = s_r * scheme.speed_inflation

    f_l = _side_flux(L, n, species)
    f_r = _side_flux(R, n, species)
    u_l = np.asarray(u_l, dtype=float)
    u_r = np.asarray(u_r, dtype=float)
    middle = (s_r * f_l - s_l * f_r + s_l * s_r * (u_r - u_l)) / (s_r - s_l)
    flux = _pick(s_l > 0.0, f_l, _pick(s_r < 0.0, f_r, middle))
    max_speed = np.maximum(np.abs(s_l), np.abs(s_r))

    entropy_flux = None
    if with_entropy:
        eta_l = thermo.entropy(u_l, species, dim)
        eta_r = thermo.entropy(u_r, species, dim)
        q_l = eta_l * L.un
        q_r = eta_r * R.un
        q_mid = (s_r * q_l - s_l * q_r + s_l * s_r * (eta_r - eta_l)) / (s_r - s_l)
        entropy_flux = _pick(s_l > 0.0, q_l, _pick(s_r < 0.0, q_r, q_mid))
    return InterfaceFlux(flux=flux, max_speed=max_speed, entropy_flux=entropy_flux)


def pressure_relax_flux(u_l, u_r, n, species: SpeciesSet, dim: int,
                        scheme: FluxScheme, with_entropy: bool = False) -> InterfaceFlux:
    """Pressure-relaxation (Suliciu-type) flux on equilibrium data.

    The star states are closed-form in the Lagrangian speed estimates; the
    interface flux is the physical flux of the selected branch state, with
    the relaxed pressure p* standing in for the equation-of-state pressure
    inside the star region.
    """
    gl = scheme.lagrangian_gamma
    L = _prep_side(u_l, n, species, dim)
    R = _prep_side(u_r, n, species, dim)
    side_l = PolytropicSide(L.rho, L.un, L.p, gl)
    side_r = PolytropicSide(R.rho, R.un, R.p, gl)
    a_l, a_r = riemann.lagrangian_speeds(side_l, side_r)
    a_l = a_l * scheme.speed_inflation
    a_r = a_r * scheme.speed_inflation
    star = riemann.pressure_relax_star(side_l, side_r, a_l, a_r)
    u_star, p_star = star.u_star, star.p_star
    rho_l_star, rho_r_star = star.rho_l_star, star.rho_r_star
    # Same energy jumps as the 1D star energies, applied to the full total
    # energy so that transverse kinetic, formation and vibration parts advect.
    E_l_star = L.E - (p_star * u_star - L.p * L.un) / a_l
    E_r_star = R.E - (R.p * R.un - p_star * u_star) / a_r

    s_l = L.un - a_l / L.rho
    s_r = R.un + a_r / R.rho

    n = np.asarray(n)
    f_l = _side_flux(L, n, species)
    f_r = _side_flux(R, n, species)
    f_l_star = _star_flux(rho_l_star, u_star, p_star, E_l_star, L, n)
    f_r_star = _star_flux(rho_r_star, u_star, p_star, E_r_star, R, n)
    flux = _pick(s_l > 0.0, f_l,
                 _pick(s_r < 0.0, f_r,
                       _pick(u_star > 0.0, f_l_star, f_r_star)))
    max_speed = np.maximum(np.abs(s_l), np.abs(s_r))

    entropy_flux = None
    if with_entropy:
        q_l = thermo.entropy(u_l, species, dim) * L.un
        q_r = thermo.entropy(u_r, species, dim) * R.un
        q_l_star = _star_entropy_flux(rho_l_star, u_star, E_l_star, L, species)
        q_r_star = _star_entropy_flux(rho_r_star, u_star, E_r_star, R, species)
        entropy_flux = _pick(s_l > 0.0, q_l,
                             _pick(s_r < 0.0, q_r,
                                   _pick(u_star > 0.0, q_l_star, q_r_star)))
    return InterfaceFlux(flux=flux, max_speed=max_speed, entropy_flux=entropy_flux)


def _star_flux(rho_star, u_star, p_star, E_star, side: _Side, n) -> np.ndarray:
    rho_u = rho_star * u_star
    return np.concatenate([
        side.Y * rho_u,
        rho_u * (u_star * np.asarray(n) + side.vperp) + p_star * np.asarray(n),
        ((rho_star * E_star + p_star) * u_star)[None],
        side.yev * rho_u,
    ], axis=0)


def _star_entropy_flux(rho_star, u_star, E_star, side: _Side, species: SpeciesSet):
    ev_spec = _specific_ev(side.Y, side.yev, species)
    e_t_star = (E_star - side.h0 - side.yev.sum(axis=0)
                - 0.5 * (u_star ** 2 + (side.vperp ** 2).sum(axis=0)))
    e_t_star = np.maximum(e_t_star, 1e-300)
    s = thermo.specific_entropy(species, side.Y, 1.0 / rho_star, e_t_star, ev_spec)
    return -rho_star * s * u_star


_FLUX_FN = {"godunov": godunov_flux, "hll": hll_flux,
            "pressure_relax": pressure_relax_flux}


def numerical_flux(u_l, u_r, n, species: SpeciesSet, dim: int,
                   scheme: FluxScheme, with_entropy: bool = False) -> InterfaceFlux:
    """Dispatch to the scheme's interface flux."""
    return _FLUX_FN[scheme.kind](u_l, u_r, n, species, dim, scheme,
                                 with_entropy=with_entropy)


def entropy_flux_Q(u_l, u_r, n, species: SpeciesSet, dim: int,
                   scheme: FluxScheme) -> np.ndarray:
    """Consistent, conservative numerical entropy flux of the scheme."""
    return numerical_flux(u_l, u_r, n, species, dim, scheme,
                          with_entropy=True).entropy_flux


def wall_flux(u, n, species: SpeciesSet, dim: int,
              scheme: FluxScheme | None = None) -> InterfaceFlux:
    """Impermeable-wall flux via the mirror-state pressure-relaxation solve.

    Closed form: only the momentum row is nonzero, carrying p_wall n with
    p_wall = p + a (v.n) and a = sqrt(gamma(Y) rho p) + (gamma(Y)+1) rho
    (v.n)^+.  The numerical entropy flux vanishes identically at a wall.
    """
    S = _prep_side(u, n, species, dim)
    a = np.sqrt(S.gamma_y * S.rho * S.p) + (S.gamma_y + 1.0) * S.rho * np.maximum(S.un, 0.0)
    p_wall = S.p + a * S.un
    n = np.asarray(n)
    tail = np.shape(S.rho)
    zeros_sp = np.zeros((species.n_species,) + tail)
    zeros_ev = np.zeros((species.n_diatomic,) + tail)
    flux = np.concatenate([zeros_sp,
                           p_wall * np.broadcast_to(n, (dim,) + tail),
                           np.zeros((1,) + tail),
                           zeros_ev], axis=0)
    if scheme is None:
        g = float(default_gamma())
    else:
        g = float(scheme.gamma)
    max_speed = np.abs(S.un) + np.sqrt(g * S.p / S.rho)
    return InterfaceFlux(flux=flux, max_speed=max_speed,
                         entropy_flux=np.zeros(tail))


def wave_speed_bound(u_l, u_r, n, species: SpeciesSet, dim: int,
                     scheme: FluxScheme) -> np.ndarray:
    """Per-interface wave-speed bound used by the CFL conditions."""
    L = _prep_side(u_l, n, species, dim)
    R = _prep_side(u_r, n, species, dim)
    g = float(scheme.gamma)
    if scheme.kind == "godunov":
        return np.maximum(np.abs(L.un) + np.sqrt(g * L.p / L.rho),
                          np.abs(R.un) + np.sqrt(g * R.p / R.rho))
    if scheme.kind == "hll":
        s_l, s_r = riemann.two_rarefaction_speeds(
            PolytropicSide(L.rho, L.un, L.p, g),
            PolytropicSide(R.rho, R.un, R.p, g))
    else:
        a_l, a_r = riemann.lagrangian_speeds(
            PolytropicSide(L.rho, L.un, L.p, scheme.lagrangian_gamma),
            PolytropicSide(R.rho, R.un, R.p, scheme.lagrangian_gamma))
        a_l = a_l * scheme.speed_inflation
        a_r = a_r * scheme.speed_inflation
        return np.maximum(np.abs(L.un - a_l / L.rho), np.abs(R.un + a_r / R.rho))
    s_l = s_l * scheme.speed_inflation
    s_r = s_r * scheme.speed_inflation
    return np.maximum(np.abs(s_l), np.abs(s_r))

"""Energy-relaxation framework linking the mixture to a polytropic gas.

The internal energy is split as e_t = e_r + e_s: a polytropic part e_r with
pressure (gamma - 1) rho e_r for a fixed exponent gamma > 5/3, and a
remainder e_s that relaxes toward the equilibrium value F(Y, e_r) at which
the polytropic pressure matches the mixture pressure.  The extended state

    w = [rho_1 .. rho_ns, mom, rhoE_r, rhoev_1 .. rhoev_nd, rho e_s]

carries its own convex entropy zeta whose minimum over energy splits is the
(negative) mixture entropy; projecting data to the equilibrium split and
lifting fluxes back is what lets a plain polytropic-gas solver drive the
full mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import thermo
from .thermo import AdmissibilityError, SpeciesSet

GAMMA_FLOOR = 5.0 / 3.0


@dataclass(frozen=True)
class RelaxGamma:
    """Adiabatic exponent of the surrogate polytropic gas.

    Must strictly exceed 5/3, the largest exponent any mixture composition
    can attain, for the energy split to stay positive.
    """

    value: float

    def __post_init__(self):
        if not self.value > GAMMA_FLOOR:
            raise ValueError(
                f"relaxation exponent must exceed 5/3, got {self.value}")

    def __float__(self) -> float:
        return self.value


def default_gamma() -> RelaxGamma:
    """The production default, 1.01 * 5/3."""
    return RelaxGamma(1.01 * 5.0 / 3.0)


def _gamma_value(gamma, strict: bool = True) -> float:
    g = float(gamma)
    if strict and not g > GAMMA_FLOOR:
        raise ValueError(f"relaxation exponent must exceed 5/3, got {g}")
    if not strict and not g > 1.0:
        raise ValueError(f"adiabatic exponent must exceed 1, got {g}")
    return g


def F_equilibrium(species: SpeciesSet, Y, e_r, gamma) -> np.ndarray:
    """Equilibrium remainder energy F(Y, e_r) = (gamma - gamma(Y))/(gamma(Y) - 1) e_r.

    This is the unique e_s for which the polytropic pressure of e_r equals
    the mixture pressure of e_r + e_s at any density.
    """
    g = _gamma_value(gamma, strict=False)
    gy = thermo.gamma_mix(species, Y, check=False)
    return (g - gy) / (gy - 1.0) * np.asarray(e_r)


def split_relax(w, species: SpeciesSet, dim: int):
    """Views of the blocks (rho_a, mom, rhoE_r, rho_ev, rho_es) of *w*."""
    w = np.asarray(w)
    ns, nd = species.n_species, species.n_diatomic
    if w.shape[0] != ns + dim + 2 + nd:
        raise ValueError(f"relaxation state has {w.shape[0]} components, "
                         f"expected {ns + dim + 2 + nd}")
    return (w[:ns], w[ns:ns + dim], w[ns + dim],
            w[ns + dim + 1:ns + dim + 1 + nd], w[ns + dim + 1 + nd])


def relax_primitives(w, species: SpeciesSet, dim: int, check: bool = True):
    """Extract (rho, Y, v, e_r, e_s, yev) from a relaxation state.

    ``yev`` are the mixture-specific partial vibration energies rho_ev/rho.
    """
    rho_a, mom, rhoEr, rho_ev, rho_es = split_relax(w, species, dim)
    rho = rho_a.sum(axis=0)
    if check and np.any(rho <= 0.0):
        raise AdmissibilityError(f"density must be > 0, min = {np.min(rho)}")
    Y = rho_a / rho
    v = mom / rho
    e_r = rhoEr / rho - 0.5 * (v * v).sum(axis=0)
    e_s = rho_es / rho
    if check and (np.any(e_r <= 0.0) or np.any(e_s <= 0.0)):
        raise AdmissibilityError(
            f"energy split must stay positive: min e_r = {np.min(e_r)}, "
            f"min e_s = {np.min(e_s)}")
    return rho, Y, v, e_r, e_s, rho_ev / rho


def project_P(u, species: SpeciesSet, dim: int, gamma) -> np.ndarray:
    """Project an admissible equilibrium state onto the relaxed system.

    The split is the equilibrium one, e_r = (gamma(Y)-1)/(gamma-1) e_t and
    e_s = e_t - e_r, so the projected state sits on the equilibrium manifold.
    """
    g = _gamma_value(gamma)
    rho, Y, v, e_t = thermo.e_t_from_conserved(u, species, dim)
    rho_a, mom, _, rho_ev = thermo.split_conserved(u, species, dim)
    gy = thermo.gamma_mix(species, Y, check=False)
    e_r = (gy - 1.0) / (g - 1.0) * e_t
    e_s = e_t - e_r
    rhoEr = rho * e_r + 0.5 * (mom * v).sum(axis=0)
    return np.concatenate([rho_a, mom, rhoEr[None], rho_ev,
                           (rho * e_s)[None]], axis=0)


def lift_L(w, species: SpeciesSet, dim: int) -> np.ndarray:
    """Linear lift back to the equilibrium variables.

    rhoE = rhoE_r + rho e_s + sum_a rho_a h0_a + sum_b rho_b ev_b; the other
    blocks are copied.
    """
    rho_a, mom, rhoEr, rho_ev, rho_es = split_relax(w, species, dim)
    rhoE = (rhoEr + rho_es + np.tensordot(species.h0, rho_a, axes=(0, 0))
            + rho_ev.sum(axis=0))
    return np.concatenate([rho_a, mom, rhoE[None], rho_ev], axis=0)


def relax_flux(w, n, species: SpeciesSet, dim: int, gamma) -> np.ndarray:
    """Normal flux of the relaxed system including the polytropic pressure."""
    g = _gamma_value(gamma)
    rho_a, mom, rhoEr, rho_ev, rho_es = split_relax(w, species, dim)
    rho, Y, v, e_r, e_s, _ = relax_primitives(w, species, dim, check=False)
    p_r = (g - 1.0) * rho * e_r
    n = np.asarray(n)
    vn = (v * n).sum(axis=0)
    return np.concatenate([
        rho_a * vn,
        mom * vn + p_r * n,
        ((rhoEr + p_r) * vn)[None],
        rho_ev * vn,
        (rho_es * vn)[None],
    ], axis=0)


def zeta(species: SpeciesSet, Y, tau, e_r, e_s, e_v, gamma) -> np.ndarray:
    """Relaxation entropy of the split state.

    zeta = -s(Y, tau, e_r + e_s, ev) + varsigma(Y, e_r, e_s), with the excess

        varsigma = C_vt ln( (gamma - gamma(Y))/(gamma - 1) * (e_r + e_s)/e_s
                            * ((gamma(Y) - 1)/(gamma - gamma(Y)) * e_s/e_r)^z ),
        z = (gamma(Y) - 1)/(gamma - 1).

    varsigma >= 0 with equality exactly at e_s = F(Y, e_r), so zeta >= -s
    with equality on the equilibrium manifold.  Intended for gamma above
    gamma(Y); at the degenerate boundary gamma = gamma(Y) the excess term
    diverges, which the convexity checks report as loss of definiteness.
    """
    g = _gamma_value(gamma, strict=False)
    e_r = np.asarray(e_r, dtype=float)
    e_s = np.asarray(e_s, dtype=float)
    gy = thermo.gamma_mix(species, Y, check=False)
    cvt = thermo.cv_tr_mix(species, Y)
    z = (gy - 1.0) / (g - 1.0)
    excess = cvt * (np.log((g - gy) / (g - 1.0) * (e_r + e_s) / e_s)
                    + z * np.log((gy - 1.0) / (g - gy) * e_s / e_r))
    return -thermo.specific_entropy(species, Y, tau, e_r + e_s, e_v) + excess


def zeta_partials(species: SpeciesSet, Y, tau, e_r, e_s, gamma):
    """Closed-form partials of zeta with respect to (tau, e_r, e_s)."""
    g = _gamma_value(gamma, strict=False)
    gy = thermo.gamma_mix(species, Y, check=False)
    r = thermo.gas_constant_mix(species, Y)
    cvt = thermo.cv_tr_mix(species, Y)
    d_tau = -r / np.asarray(tau)
    d_er = -r / ((g - 1.0) * np.asarray(e_r))
    d_es = (gy - g) / (g - 1.0) * cvt / np.asarray(e_s)
    return d_tau, d_er, d_es


def relax_entropy(w, species: SpeciesSet, dim: int, gamma) -> np.ndarray:
    """Convex entropy rho zeta(w) of the relaxed system."""
    rho, Y, v, e_r, e_s, yev = relax_primitives(w, species, dim, check=False)
    nd = species.n_diatomic
    with np.errstate(invalid="ignore", divide="ignore"):
        e_v = np.where(Y[:nd] > 0.0, yev / np.where(Y[:nd] > 0.0, Y[:nd], 1.0), 0.0)
    return rho * zeta(species, Y, 1.0 / rho, e_r, e_s, e_v, gamma)


def variational_minimize(species: SpeciesSet, Y, tau, e_t, e_v, gamma,
                         rel_tol: float = 1e-12):
    """Minimize zeta over splits e_r + e_s = e_t by golden-section search.

    The objective is strictly convex on the open segment so the bracketed
    search converges unconditionally.  Value comparisons in double
    precision flatten out around 1e-8 of e_t, so the bracket result is
    polished with Newton steps on the closed-form derivative of the
    constrained objective before returning (e_r_star, zeta_min).
    """
    g = _gamma_value(gamma)
    e_t = float(e_t)
    if e_t <= 0.0:
        raise AdmissibilityError(f"e_t must be > 0, got {e_t}")

    def objective(e_r):
        return float(zeta(species, Y, tau, e_r, e_t - e_r, e_v, g))

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 0.0, e_t
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    while (hi - lo) > rel_tol * e_t:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = objective(x2)
    e_r_star = 0.5 * (lo + hi)

    # Newton polish on d zeta / d e_r along the constraint (monotone by
    # convexity); recovers the digits the value comparison cannot resolve.
    r = float(thermo.gas_constant_mix(species, Y))
    cvt = float(thermo.cv_tr_mix(species, Y))
    gy = float(thermo.gamma_mix(species, Y, check=False))
    for _ in range(3):
        e_s = e_t - e_r_star
        grad = (-r / e_r_star + (g - gy) * cvt / e_s) / (g - 1.0)
        curv = (r / e_r_star ** 2 + (g - gy) * cvt / e_s ** 2) / (g - 1.0)
        step = grad / curv
        e_r_star = min(max(e_r_star - step, 0.25 * e_r_star), e_t - 0.25 * e_s)
    return e_r_star, objective(e_r_star)


def homogeneous_relax_step(w, species: SpeciesSet, dim: int, gamma,
                           epsilon: float, dt: float) -> np.ndarray:
    """Advance the space-homogeneous relaxation ODE exactly over *dt*.

    With composition frozen, e_s obeys a linear ODE whose solution decays
    toward the equilibrium split at rate (1 + F'(Y)) / epsilon; densities,
    momentum, vibration energies and the total rho(E_r + e_s) are invariant.
    Solving in closed form keeps the entropy-decay test sharp for any
    epsilon.
    """
    if epsilon <= 0.0 or dt < 0.0:
        raise ValueError("need epsilon > 0 and dt >= 0")
    g = _gamma_value(gamma)
    rho_a, mom, rhoEr, rho_ev, rho_es = split_relax(w, species, dim)
    rho, Y, v, e_r, e_s, _ = relax_primitives(w, species, dim)
    gy = thermo.gamma_mix(species, Y, check=False)
    k = (g - gy) / (gy - 1.0)       # e_s relaxes toward k * e_r
    e_tot = e_r + e_s
    e_s_eq = k / (1.0 + k) * e_tot
    with np.errstate(over="ignore"):
        decay = np.exp(-(1.0 + k) * dt / epsilon)
    e_s_new = e_s_eq + (e_s - e_s_eq) * decay
    rho_es_new = rho * e_s_new
    rhoEr_new = rhoEr + (rho_es - rho_es_new)
    return np.concatenate([rho_a, mom, np.asarray(rhoEr_new)[None], rho_ev,
                           np.asarray(rho_es_new)[None]], axis=0)

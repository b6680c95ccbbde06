"""Mixture thermodynamics for multi-species gases with vibrational nonequilibrium.

Each species is a polytropic ideal gas, monoatomic (C_v = 3/2 r) or diatomic
(C_v = 5/2 r).  Diatomic species additionally carry a harmonic-oscillator
vibration energy with its own vibration temperature, so the gas is in thermal
nonequilibrium whenever the vibration temperatures differ from the
translation-rotation temperature.

State vectors are stored component-major so that everything here broadcasts
over trailing batch axes (single states, 1D grids of cells, 2D edge batches):

    u = [rho_1 .. rho_ns, mom_1 .. mom_d, rhoE, rhoev_1 .. rhoev_nd]

with partial densities rho_a, momentum, total energy density and partial
vibration energy densities rho_b * ev_b.  All functions are pure; a
:class:`SpeciesSet` is immutable and safe to share between workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple, Sequence

import numpy as np

UNIVERSAL_GAS_CONSTANT = 8.31446  # J/(mol K)

# Composition handling: |sum(Y) - 1| below PASS is accepted verbatim, below
# RENORM it is silently renormalized, anything larger is rejected.
COMPOSITION_PASS_TOL = 1e-12
COMPOSITION_RENORM_TOL = 1e-9


class CompositionError(ValueError):
    """Mass fractions are negative or do not sum to one."""


class AdmissibilityError(ValueError):
    """State violates positivity of densities or internal/vibration energies."""


@dataclass(frozen=True)
class Species:
    """Constants of a single species."""

    name: str
    mol_weight: float          # kg/mol
    diatomic: bool
    h0: float = 0.0            # formation enthalpy, J/kg
    theta_v: float | None = None  # characteristic vibration temperature, K

    def __post_init__(self):
        if self.mol_weight <= 0.0:
            raise ValueError(f"{self.name}: molecular weight must be positive")
        if self.h0 < 0.0:
            raise ValueError(f"{self.name}: formation enthalpy must be >= 0")
        if self.diatomic:
            if self.theta_v is None or self.theta_v <= 0.0:
                raise ValueError(
                    f"{self.name}: diatomic species needs theta_v > 0")
        elif self.theta_v is not None:
            raise ValueError(f"{self.name}: theta_v given for monoatomic species")

    @property
    def gas_constant(self) -> float:
        return UNIVERSAL_GAS_CONSTANT / self.mol_weight

    @property
    def cv_tr(self) -> float:
        """Translation-rotation specific heat at constant volume."""
        factor = 2.5 if self.diatomic else 1.5
        return factor * self.gas_constant


@dataclass(frozen=True)
class SpeciesSet:
    """An ordered mixture of species, diatomic species first.

    The ordering contract matters: state vectors store the n_d diatomic
    species in the leading slots so that the vibration-energy block lines up
    with the species block.  Use :meth:`from_species` or :meth:`from_file`,
    which reorder automatically.
    """

    species: tuple[Species, ...]
    # Derived arrays, filled in __post_init__.
    mol_weight: np.ndarray = field(init=False, repr=False)
    r: np.ndarray = field(init=False, repr=False)
    cv_tr: np.ndarray = field(init=False, repr=False)
    h0: np.ndarray = field(init=False, repr=False)
    theta_v: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.species:
            raise ValueError("mixture needs at least one species")
        n_d = sum(sp.diatomic for sp in self.species)
        if any(sp.diatomic for sp in self.species[n_d:]):
            raise ValueError("diatomic species must come first")
        names = [sp.name for sp in self.species]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate species in {names}")

        def _set(name, value):
            object.__setattr__(self, name, value)

        _set("mol_weight", np.array([sp.mol_weight for sp in self.species]))
        _set("r", np.array([sp.gas_constant for sp in self.species]))
        _set("cv_tr", np.array([sp.cv_tr for sp in self.species]))
        _set("h0", np.array([sp.h0 for sp in self.species]))
        _set("theta_v", np.array([sp.theta_v for sp in self.species[:n_d]],
                                 dtype=float))
        for arr in (self.mol_weight, self.r, self.cv_tr, self.h0, self.theta_v):
            arr.setflags(write=False)

    @classmethod
    def from_species(cls, species: Sequence[Species]) -> "SpeciesSet":
        ordered = sorted(species, key=lambda sp: not sp.diatomic)
        return cls(tuple(ordered))

    @classmethod
    def from_file(cls, path, names: Sequence[str] | None = None) -> "SpeciesSet":
        """Load species from a plain-text database.

        One species per line: ``name M kind h0 [theta_v]``, ``#`` starts a
        comment.  If *names* is given, only those species are selected (in
        database order, diatomics first).
        """
        table = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) not in (4, 5):
                    raise ValueError(f"{path}:{lineno}: expected "
                                     f"'name M kind h0 [theta_v]', got {raw!r}")
                name, mw, kind, h0 = parts[:4]
                if kind not in ("diatomic", "monoatomic"):
                    raise ValueError(f"{path}:{lineno}: unknown kind {kind!r}")
                theta_v = float(parts[4]) if len(parts) == 5 else None
                table[name] = Species(name, float(mw), kind == "diatomic",
                                      float(h0), theta_v)
        if names is None:
            selected = list(table.values())
        else:
            missing = [n for n in names if n not in table]
            if missing:
                raise KeyError(f"species not in database {path}: {missing}")
            selected = [table[n] for n in names]
        return cls.from_species(selected)

    @classmethod
    def bundled(cls, names: Sequence[str] | None = None) -> "SpeciesSet":
        """Load from the species database shipped with the package."""
        ref = resources.files("relaxfv.data").joinpath("species.dat")
        with resources.as_file(ref) as path:
            return cls.from_file(path, names)

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_diatomic(self) -> int:
        return len(self.theta_v)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sp.name for sp in self.species)

    def n_conserved(self, dim: int) -> int:
        """Components of the equilibrium state vector in *dim* dimensions."""
        return self.n_species + dim + 1 + self.n_diatomic

    def index(self, name: str) -> int:
        return self.names.index(name)


def _as_composition(species: SpeciesSet, Y, check: bool):
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] != species.n_species:
        raise CompositionError(
            f"composition has {Y.shape[0]} entries, expected {species.n_species}")
    if not check:
        return Y
    if np.any(Y < -COMPOSITION_PASS_TOL):
        raise CompositionError(f"negative mass fraction: min(Y) = {Y.min()}")
    Y = np.maximum(Y, 0.0)
    total = Y.sum(axis=0)
    err = np.abs(total - 1.0)
    if np.any(err > COMPOSITION_RENORM_TOL):
        raise CompositionError(
            f"mass fractions sum to {total} (max error {err.max():.3e})")
    if np.any(err > COMPOSITION_PASS_TOL):
        Y = Y / total
    return Y


def gas_constant_mix(species: SpeciesSet, Y) -> np.ndarray:
    """Mixture gas constant r(Y) = sum_a Y_a r_a."""
    return np.tensordot(species.r, np.asarray(Y, dtype=float), axes=(0, 0))


def cv_tr_mix(species: SpeciesSet, Y) -> np.ndarray:
    """Mixture translation-rotation specific heat C_vt(Y)."""
    return np.tensordot(species.cv_tr, np.asarray(Y, dtype=float), axes=(0, 0))


def gamma_mix(species: SpeciesSet, Y, check: bool = True) -> np.ndarray:
    """Equivalent adiabatic exponent gamma(Y) = r(Y)/C_vt(Y) + 1.

    Bounded by 7/5 (pure diatomic) and 5/3 (pure monoatomic) for any
    admissible composition.
    """
    Y = _as_composition(species, Y, check)
    return gas_constant_mix(species, Y) / cv_tr_mix(species, Y) + 1.0


def pressure(species: SpeciesSet, Y, rho, e_t) -> np.ndarray:
    """Mixture pressure p = (gamma(Y) - 1) rho e_t = rho r(Y) T."""
    return (gamma_mix(species, Y, check=False) - 1.0) * np.asarray(rho) * np.asarray(e_t)


def temperature(species: SpeciesSet, Y, e_t) -> np.ndarray:
    """Translation-rotation temperature T = e_t / C_vt(Y)."""
    return np.asarray(e_t) / cv_tr_mix(species, Y)


def frozen_sound_speed(species: SpeciesSet, Y, e_t) -> np.ndarray:
    """Sound speed at frozen composition and vibration energies."""
    g = gamma_mix(species, Y, check=False)
    return np.sqrt(g * (g - 1.0) * np.asarray(e_t))


def vib_energy(species: SpeciesSet, beta: int, Tv) -> np.ndarray:
    """Specific vibration energy of diatomic species *beta* at temperature Tv.

    e = r theta_v / (exp(theta_v/Tv) - 1), the harmonic-oscillator value.
    """
    Tv = np.asarray(Tv, dtype=float)
    if np.any(Tv <= 0.0):
        raise AdmissibilityError(f"vibration temperature must be > 0, got {Tv}")
    r = species.r[beta]
    theta = species.theta_v[beta]
    with np.errstate(over="ignore"):
        return r * theta / np.expm1(theta / Tv)


def vib_temperature(species: SpeciesSet, beta: int, e_v) -> np.ndarray:
    """Vibration temperature from the specific vibration energy (exact inverse)."""
    e_v = np.asarray(e_v, dtype=float)
    if np.any(e_v <= 0.0):
        raise AdmissibilityError(f"vibration energy must be > 0, got {e_v}")
    r = species.r[beta]
    theta = species.theta_v[beta]
    return theta / np.log1p(r * theta / e_v)


def vib_entropy(species: SpeciesSet, e_v) -> np.ndarray:
    """Specific vibration entropies s_b(ev_b) for all diatomic species.

    Evaluated in the overflow-safe form r ln(e + r theta) + (e/theta) ln(1 +
    r theta / e), equal to r ln e + r (1 + e/(r theta)) ln(1 + r theta/e).
    Entries with e_v = 0 get the finite limit r ln(r theta).
    """
    e_v = np.asarray(e_v, dtype=float)
    r = _col(species.r[:species.n_diatomic], e_v.ndim)
    theta = _col(species.theta_v, e_v.ndim)
    rt = r * theta
    safe = np.where(e_v > 0.0, e_v, 1.0)
    with np.errstate(divide="ignore"):
        s = r * np.log(safe + rt) + (safe / theta) * np.log1p(rt / safe)
    return np.where(e_v > 0.0, s, r * np.log(rt))


def vib_entropy_prime(species: SpeciesSet, e_v) -> np.ndarray:
    """d s_b / d ev_b = 1 / Tv_b, for all diatomic species."""
    e_v = np.asarray(e_v, dtype=float)
    r = _col(species.r[:species.n_diatomic], e_v.ndim)
    theta = _col(species.theta_v, e_v.ndim)
    return np.log1p(r * theta / e_v) / theta


def vib_entropy_second(species: SpeciesSet, e_v) -> np.ndarray:
    """d^2 s_b / d ev_b^2 = -r / (e (e + r theta)) < 0."""
    e_v = np.asarray(e_v, dtype=float)
    r = _col(species.r[:species.n_diatomic], e_v.ndim)
    theta = _col(species.theta_v, e_v.ndim)
    return -r / (e_v * (e_v + r * theta))


def _col(arr, ndim):
    """Reshape a per-species 1D array to broadcast against (n, ...) data."""
    return np.asarray(arr).reshape((-1,) + (1,) * (ndim - 1)) if ndim > 1 else np.asarray(arr)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0.0, x, 1.0)
    return np.where(x > 0.0, x * np.log(safe), 0.0)


def specific_entropy(species: SpeciesSet, Y, tau, e_t, e_v) -> np.ndarray:
    """Specific mixture entropy s(Y, tau, e_t, ev).

    s = C_vt(Y) ln e_t + r(Y) ln tau + K(Y) + sum_b Y_b s_b(ev_b), with the
    mixing term K(Y) = sum_a Y_a (C_va ln(C_va/C_vt(Y)) - r_a ln Y_a).
    Vanishing species contribute zero (x ln x -> 0); *e_v* holds the
    per-species-mass vibration energies of the diatomic species.
    """
    Y = np.asarray(Y, dtype=float)
    tau = np.asarray(tau, dtype=float)
    e_t = np.asarray(e_t, dtype=float)
    e_v = np.asarray(e_v, dtype=float)
    nd = species.n_diatomic
    cvt = cv_tr_mix(species, Y)
    r = gas_constant_mix(species, Y)
    cva = _col(species.cv_tr, Y.ndim)
    ra = _col(species.r, Y.ndim)
    # K(Y): write Y ln(C_va/C_vt) as Y * (ln C_va - ln C_vt) to keep the
    # x ln x -> 0 limit explicit in the -r_a Y ln Y part only.
    mixing = (Y * cva * (np.log(cva) - np.log(cvt))).sum(axis=0)
    mixing = mixing - (ra * _xlogx(Y)).sum(axis=0)
    s = cvt * np.log(e_t) + r * np.log(tau) + mixing
    if nd:
        sv = vib_entropy(species, np.where(Y[:nd] > 0.0, e_v, 1.0))
        s = s + np.where(Y[:nd] > 0.0, Y[:nd] * sv, 0.0).sum(axis=0)
    return s


class PrimitiveState(NamedTuple):
    """Primitive description of an admissible state.

    ``e_v`` stores the per-species-mass vibration energies (length n_d) and
    ``Tv`` the matching vibration temperatures; entries of species with zero
    mass fraction are zero.
    """

    Y: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    e_t: np.ndarray
    e_v: np.ndarray
    p: np.ndarray
    T: np.ndarray
    Tv: np.ndarray


def split_conserved(u, species: SpeciesSet, dim: int):
    """Views of the partial-density, momentum, energy and vibration blocks."""
    u = np.asarray(u)
    ns = species.n_species
    if u.shape[0] != species.n_conserved(dim):
        raise ValueError(f"state has {u.shape[0]} components, expected "
                         f"{species.n_conserved(dim)}")
    return (u[:ns], u[ns:ns + dim], u[ns + dim],
            u[ns + dim + 1:ns + dim + 1 + species.n_diatomic])


def conserved(species: SpeciesSet, dim: int, rho_alpha, mom, rhoE, rho_ev) -> np.ndarray:
    """Stack the conserved blocks into a state vector."""
    rho_alpha = np.asarray(rho_alpha, dtype=float)
    tail = rho_alpha.shape[1:]
    mom = np.broadcast_to(np.asarray(mom, dtype=float), (dim,) + tail)
    rhoE = np.broadcast_to(np.asarray(rhoE, dtype=float), tail)
    rho_ev = np.broadcast_to(np.asarray(rho_ev, dtype=float),
                             (species.n_diatomic,) + tail)
    return np.concatenate([rho_alpha, mom, rhoE[None], rho_ev], axis=0)


def e_t_from_conserved(u, species: SpeciesSet, dim: int, check: bool = True):
    """Extract (rho, Y, v, e_t) with e_t = E - h0(Y) - e_v - |v|^2/2."""
    rho_a, mom, rhoE, rho_ev = split_conserved(u, species, dim)
    rho = rho_a.sum(axis=0)
    if check and np.any(rho <= 0.0):
        raise AdmissibilityError(f"mixture density must be > 0, min = {rho.min()}")
    Y = rho_a / rho
    v = mom / rho
    e_t = rhoE / rho
    e_t = e_t - np.tensordot(species.h0, Y, axes=(0, 0))
    e_t = e_t - rho_ev.sum(axis=0) / rho
    e_t = e_t - 0.5 * (v * v).sum(axis=0)
    if check and np.any(e_t <= 0.0):
        raise AdmissibilityError(
            f"translation-rotation energy must be > 0, min e_t = {np.min(e_t)}")
    return rho, Y, v, e_t


def is_admissible(u, species: SpeciesSet, dim: int) -> np.ndarray:
    """Elementwise admissibility: rho_a >= 0, rho > 0, e_t > 0, rho ev_b >= 0.

    Vanishing phases (exactly zero partial density with zero vibration
    energy) are admitted.
    """
    rho_a, mom, rhoE, rho_ev = split_conserved(u, species, dim)
    rho = rho_a.sum(axis=0)
    ok = (rho_a >= 0.0).all(axis=0) & (rho > 0.0)
    ok &= (rho_ev >= 0.0).all(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        safe_rho = np.where(rho > 0.0, rho, 1.0)
        Y = rho_a / safe_rho
        v = mom / safe_rho
        e_t = (rhoE / safe_rho
               - np.tensordot(species.h0, Y, axes=(0, 0))
               - rho_ev.sum(axis=0) / safe_rho
               - 0.5 * (v * v).sum(axis=0))
    ok &= np.where(np.isfinite(e_t), e_t > 0.0, False)
    return ok


def conserved_to_primitive(u, species: SpeciesSet, dim: int,
                           check: bool = True) -> PrimitiveState:
    """Full primitive decomposition of *u* (broadcasts over batch axes)."""
    rho, Y, v, e_t = e_t_from_conserved(u, species, dim, check=check)
    rho_a, _, _, rho_ev = split_conserved(u, species, dim)
    nd = species.n_diatomic
    if nd:
        with np.errstate(invalid="ignore", divide="ignore"):
            e_v = np.where(rho_a[:nd] > 0.0, rho_ev / np.where(
                rho_a[:nd] > 0.0, rho_a[:nd], 1.0), 0.0)
        if check and np.any((rho_a[:nd] > 0.0) & (e_v <= 0.0)):
            raise AdmissibilityError("vibration energy must be > 0 for "
                                     "present diatomic species")
        r = _col(species.r[:nd], e_v.ndim)
        theta = _col(species.theta_v, e_v.ndim)
        safe = np.where(e_v > 0.0, e_v, 1.0)
        Tv = np.where(e_v > 0.0, theta / np.log1p(r * theta / safe), 0.0)
    else:
        e_v = np.zeros((0,) + np.shape(rho))
        Tv = e_v
    p = pressure(species, Y, rho, e_t)
    T = temperature(species, Y, e_t)
    return PrimitiveState(Y=Y, rho=rho, v=v, e_t=e_t, e_v=e_v, p=p, T=T, Tv=Tv)


def primitive_to_conserved(prim: PrimitiveState, species: SpeciesSet,
                           dim: int) -> np.ndarray:
    """Inverse of :func:`conserved_to_primitive`."""
    Y = np.asarray(prim.Y, dtype=float)
    rho = np.asarray(prim.rho, dtype=float)
    nd = species.n_diatomic
    rho_a = Y * rho
    mom = np.asarray(prim.v, dtype=float) * rho
    e_v_mix = (Y[:nd] * prim.e_v).sum(axis=0) if nd else 0.0
    E = (np.tensordot(species.h0, Y, axes=(0, 0)) + prim.e_t + e_v_mix
         + 0.5 * (np.asarray(prim.v) ** 2).sum(axis=0))
    rho_ev = rho_a[:nd] * prim.e_v if nd else np.zeros((0,) + np.shape(rho))
    return conserved(species, dim, rho_a, mom, rho * E, rho_ev)


def specific_entropy_of(u, species: SpeciesSet, dim: int) -> np.ndarray:
    """Specific mixture entropy of a conserved state."""
    prim = conserved_to_primitive(u, species, dim, check=False)
    return specific_entropy(species, prim.Y, 1.0 / prim.rho, prim.e_t, prim.e_v)


def entropy_pair(u, n, species: SpeciesSet, dim: int):
    """Entropy and normal entropy flux: eta = -rho s, q.n = eta (v.n)."""
    rho, Y, v, _ = e_t_from_conserved(u, species, dim, check=False)
    eta = -rho * specific_entropy_of(u, species, dim)
    vn = (v * np.asarray(n)).sum(axis=0)
    return eta, eta * vn


def entropy(u, species: SpeciesSet, dim: int) -> np.ndarray:
    """Convex entropy eta(u) = -rho s(u)."""
    rho, _, _, _ = e_t_from_conserved(u, species, dim, check=False)
    return -rho * specific_entropy_of(u, species, dim)


def entropy_variables(u, species: SpeciesSet, dim: int) -> np.ndarray:
    """Gradient of eta(u) = -rho s with respect to the conserved variables.

    Requires strictly positive partial densities (the gradient diverges for
    vanishing phases).  Components, with theta = 1/T and thetav_b = 1/Tv_b:

    * species a:  C_va + r_a - s_a + psi_a thetav_a g_a + (h0_a - |v|^2/2) theta
    * momentum:   theta v
    * energy:     -theta
    * vibration:  theta - thetav_b

    where s_a is the translation-rotation entropy of the species at its own
    covolume and g_b = ev_b - Tv_b s_b(ev_b) the vibration Gibbs function.
    """
    prim = conserved_to_primitive(u, species, dim, check=False)
    if np.any(prim.Y <= 0.0):
        raise AdmissibilityError("entropy variables need strictly positive "
                                 "partial densities")
    ns, nd = species.n_species, species.n_diatomic
    ndim = prim.Y.ndim
    theta = 1.0 / prim.T
    e_c = 0.5 * (prim.v ** 2).sum(axis=0)
    rho_a = prim.Y * prim.rho

    cva = _col(species.cv_tr, ndim)
    ra = _col(species.r, ndim)
    h0 = _col(species.h0, ndim)
    # Translation-rotation entropy per species: e_a = C_va T, tau_a = 1/rho_a.
    s_tr = cva * np.log(cva * prim.T) - ra * np.log(rho_a)
    rows_species = cva + ra - s_tr + (h0 - e_c) * theta
    if nd:
        thetav = vib_entropy_prime(species, prim.e_v)
        g_v = prim.e_v - prim.Tv * vib_entropy(species, prim.e_v)
        rows_species = rows_species + np.concatenate(
            [thetav * g_v, np.zeros((ns - nd,) + np.shape(prim.rho))], axis=0)
        rows_vib = theta - thetav
    else:
        rows_vib = np.zeros((0,) + np.shape(prim.rho))
    return np.concatenate([rows_species, theta * prim.v,
                           -theta[None], rows_vib], axis=0)


def du_dZ(u, species: SpeciesSet, dim: int) -> np.ndarray:
    """Jacobian of the conserved variables with respect to Z = (rho_a, v, T, ev).

    Returned with shape (n, n) for a single state or (n, n) + batch for
    batched input.  Used by the entropy-Hessian congruence check.
    """
    prim = conserved_to_primitive(u, species, dim, check=False)
    ns, nd = species.n_species, species.n_diatomic
    n = species.n_conserved(dim)
    tail = np.shape(prim.rho)
    J = np.zeros((n, n) + tail)
    rho_a = prim.Y * prim.rho
    e_c = 0.5 * (prim.v ** 2).sum(axis=0)
    iE = ns + dim
    for a in range(ns):
        J[a, a] = 1.0
    for i in range(dim):
        J[ns + i, :ns] = prim.v[i]
        J[ns + i, ns + i] = prim.rho
    # d(rhoE)/d rho_a at fixed (v, T, ev): C_va T + h0_a + psi_a ev_a + |v|^2/2
    J[iE, :ns] = (_col(species.cv_tr, prim.T.ndim + 1) * prim.T
                  + _col(species.h0, prim.T.ndim + 1) + e_c)
    if nd:
        J[iE, :nd] += prim.e_v
    for i in range(dim):
        J[iE, ns + i] = prim.rho * prim.v[i]
    J[iE, iE] = prim.rho * cv_tr_mix(species, prim.Y)
    for b in range(nd):
        J[iE, iE + 1 + b] = rho_a[b]
        J[iE + 1 + b, b] = prim.e_v[b]
        J[iE + 1 + b, iE + 1 + b] = rho_a[b]
    return J


def congruence_diagonal(u, species: SpeciesSet, dim: int) -> np.ndarray:
    """Diagonal matching (du/dZ)^T H_eta (du/dZ) for admissible states.

    Entries: r_a tau_a (species), rho theta (momentum, d times),
    rho C_vt theta^2 (energy), -rho_b s_b''(ev_b) (vibration).
    """
    prim = conserved_to_primitive(u, species, dim, check=False)
    ns, nd = species.n_species, species.n_diatomic
    theta = 1.0 / prim.T
    rho_a = prim.Y * prim.rho
    parts = [_col(species.r, prim.Y.ndim) / rho_a,
             np.broadcast_to(prim.rho * theta, (dim,) + np.shape(prim.rho)),
             (prim.rho * cv_tr_mix(species, prim.Y) * theta ** 2)[None]]
    if nd:
        parts.append(-rho_a[:nd] * vib_entropy_second(species, prim.e_v))
    return np.concatenate(parts, axis=0)


def physical_flux(u, n, species: SpeciesSet, dim: int) -> np.ndarray:
    """Normal physical flux f(u).n of the equilibrium system."""
    rho_a, mom, rhoE, rho_ev = split_conserved(u, species, dim)
    rho, Y, v, e_t = e_t_from_conserved(u, species, dim, check=False)
    vn = (v * np.asarray(n)).sum(axis=0)
    p = pressure(species, Y, rho, e_t)
    return np.concatenate([
        rho_a * vn,
        mom * vn + p * np.asarray(n),
        ((rhoE + p) * vn)[None],
        rho_ev * vn,
    ], axis=0)

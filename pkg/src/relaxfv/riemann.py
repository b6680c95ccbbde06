"""Riemann machinery for a polytropic ideal gas.

Exact star-state solver (Newton with bisection safeguard), self-similar fan
sampling, two-rarefaction wave-speed bounds, and the pressure-relaxation
(Suliciu-type) approximate solver with its Lagrangian sound-speed estimates.
All functions broadcast over trailing batch axes of the side fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class VacuumError(RuntimeError):
    """The Riemann data generate vacuum; the solver refuses to continue."""


@dataclass(frozen=True)
class PolytropicSide:
    """One side of a polytropic Riemann problem: density, normal velocity,
    pressure, and the shared adiabatic exponent.  Fields may be arrays."""

    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    gamma: float

    def __post_init__(self):
        if np.any(np.asarray(self.rho) <= 0.0) or np.any(np.asarray(self.p) <= 0.0):
            raise ValueError("side states need rho > 0 and p > 0")
        if not self.gamma > 1.0:
            raise ValueError(f"adiabatic exponent must exceed 1, got {self.gamma}")

    @property
    def sound_speed(self) -> np.ndarray:
        return np.sqrt(self.gamma * np.asarray(self.p) / np.asarray(self.rho))


@dataclass(frozen=True)
class StarState:
    """Intermediate states of the pressure-relaxation solver."""

    p_star: np.ndarray
    u_star: np.ndarray
    rho_l_star: np.ndarray
    rho_r_star: np.ndarray
    er_l_star: np.ndarray
    er_r_star: np.ndarray
    a_l: np.ndarray
    a_r: np.ndarray


def _check_shared_gamma(left: PolytropicSide, right: PolytropicSide) -> float:
    if left.gamma != right.gamma:
        raise ValueError(f"sides must share gamma, got {left.gamma} != {right.gamma}")
    return left.gamma


def _pressure_fn(p, rho, p0, c, gamma):
    """Velocity jump across the nonlinear wave connecting p0 to p.

    Shock branch for p > p0, rarefaction branch otherwise; the standard
    function whose root in p gives the star pressure.
    """
    A = 2.0 / ((gamma + 1.0) * rho)
    B = (gamma - 1.0) / (gamma + 1.0) * p0
    shock = (p - p0) * np.sqrt(A / (p + B))
    with np.errstate(invalid="ignore"):
        raref = (2.0 * c / (gamma - 1.0)) * (
            np.power(np.maximum(p, 0.0) / p0, (gamma - 1.0) / (2.0 * gamma)) - 1.0)
    return np.where(p > p0, shock, raref)


def _pressure_fn_prime(p, rho, p0, c, gamma):
    A = 2.0 / ((gamma + 1.0) * rho)
    B = (gamma - 1.0) / (gamma + 1.0) * p0
    shock = np.sqrt(A / (p + B)) * (1.0 - 0.5 * (p - p0) / (p + B))
    with np.errstate(invalid="ignore", divide="ignore"):
        raref = (1.0 / (rho * c)) * np.power(
            np.maximum(p, 1e-300) / p0, -(gamma + 1.0) / (2.0 * gamma))
    return np.where(p > p0, shock, raref)


def two_rarefaction_pressure(left: PolytropicSide, right: PolytropicSide) -> np.ndarray:
    """Closed-form star-pressure estimate assuming two rarefaction waves."""
    g = _check_shared_gamma(left, right)
    cl, cr = left.sound_speed, right.sound_speed
    z = (g - 1.0) / (2.0 * g)
    num = cl + cr + 0.5 * (g - 1.0) * (np.asarray(left.u) - np.asarray(right.u))
    den = cl * np.power(left.p, -z) + cr * np.power(right.p, -z)
    return np.power(np.maximum(num, 0.0) / den, 1.0 / z)


def exact_star(left: PolytropicSide, right: PolytropicSide,
               tol: float = 1e-12, max_iter: int = 100):
    """Exact star pressure and velocity of the polytropic Riemann problem.

    Newton iteration on the pressure function, initialized from the
    two-rarefaction estimate, with a bisection fallback whenever an iterate
    leaves the current bracket.  Converges to relative tolerance *tol* on
    the pressure.  Raises :class:`VacuumError` on vacuum-generating data.
    """
    g = _check_shared_gamma(left, right)
    rho_l, u_l, p_l = (np.asarray(left.rho, dtype=float),
                       np.asarray(left.u, dtype=float),
                       np.asarray(left.p, dtype=float))
    rho_r, u_r, p_r = (np.asarray(right.rho, dtype=float),
                       np.asarray(right.u, dtype=float),
                       np.asarray(right.p, dtype=float))
    cl = left.sound_speed
    cr = right.sound_speed
    du = u_r - u_l
    if np.any(2.0 * (cl + cr) / (g - 1.0) <= du):
        raise VacuumError("data generate vacuum (pressure positivity violated)")

    def phi(p):
        return (_pressure_fn(p, rho_l, p_l, cl, g)
                + _pressure_fn(p, rho_r, p_r, cr, g) + du)

    p = np.maximum(two_rarefaction_pressure(left, right),
                   1e-14 * np.minimum(p_l, p_r))
    # Bracket: phi is increasing; phi(0+) = -2(cl+cr)/(g-1) + du < 0 by the
    # vacuum check, so a root exists in (0, p_hi] for large enough p_hi.
    lo = np.zeros_like(p)
    hi = np.maximum(np.maximum(p_l, p_r), p) * 2.0
    f_hi = phi(hi)
    for _ in range(200):
        grow = f_hi < 0.0
        if not np.any(grow):
            break
        hi = np.where(grow, hi * 4.0, hi)
        f_hi = np.where(grow, phi(hi), f_hi)

    converged = np.zeros(np.shape(p), dtype=bool)
    for _ in range(max_iter):
        f = phi(p)
        lo = np.where(f < 0.0, np.maximum(lo, p), lo)
        hi = np.where(f >= 0.0, np.minimum(hi, p), hi)
        fp = (_pressure_fn_prime(p, rho_l, p_l, cl, g)
              + _pressure_fn_prime(p, rho_r, p_r, cr, g))
        step = f / fp
        p_new = p - step
        outside = (p_new <= lo) | (p_new >= hi) | ~np.isfinite(p_new)
        p_new = np.where(outside, 0.5 * (lo + hi), p_new)
        converged = np.abs(p_new - p) <= tol * np.maximum(p_new, 1e-300)
        p = p_new
        if np.all(converged):
            break
    u_star = 0.5 * (u_l + u_r) + 0.5 * (_pressure_fn(p, rho_r, p_r, cr, g)
                                        - _pressure_fn(p, rho_l, p_l, cl, g))
    return p, u_star


def sample_fan(left: PolytropicSide, right: PolytropicSide,
               p_star, u_star, xi: float = 0.0):
    """Sample the self-similar exact solution at the ray x/t = *xi*.

    Handles shock and rarefaction waves on both sides including states
    inside a sonic rarefaction; returns (rho, u, p).  The side of the
    contact is chosen by u_star > xi, so a stationary contact samples just
    to its right.
    """
    g = _check_shared_gamma(left, right)
    rho_l, u_l, p_l = (np.asarray(left.rho, dtype=float),
                       np.asarray(left.u, dtype=float),
                       np.asarray(left.p, dtype=float))
    rho_r, u_r, p_r = (np.asarray(right.rho, dtype=float),
                       np.asarray(right.u, dtype=float),
                       np.asarray(right.p, dtype=float))
    cl, cr = left.sound_speed, right.sound_speed
    p_star = np.asarray(p_star, dtype=float)
    u_star = np.asarray(u_star, dtype=float)
    g1 = (g - 1.0) / (2.0 * g)
    g2 = (g + 1.0) / (2.0 * g)
    g6 = (g - 1.0) / (g + 1.0)

    take_left = u_star > xi

    # Left wave.
    pr_l = p_star / p_l
    shock_l = p_star > p_l
    s_shock_l = u_l - cl * np.sqrt(g2 * pr_l + g1)
    rho_shock_l = rho_l * (pr_l + g6) / (g6 * pr_l + 1.0)
    c_star_l = cl * np.power(pr_l, g1)
    s_head_l = u_l - cl
    s_tail_l = u_star - c_star_l
    # Fan interior (only used when head <= xi <= tail).
    u_fan_l = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * u_l + xi)
    c_fan_l = np.maximum(2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * (u_l - xi)), 0.0)
    rho_fan_l = rho_l * np.power(c_fan_l / cl, 2.0 / (g - 1.0))
    p_fan_l = p_l * np.power(c_fan_l / cl, 2.0 * g / (g - 1.0))
    rho_star_l = np.where(shock_l, rho_shock_l, rho_l * np.power(pr_l, 1.0 / g))

    outer_l = np.where(shock_l, s_shock_l > xi, s_head_l > xi)
    in_fan_l = ~shock_l & (s_head_l <= xi) & (s_tail_l > xi)
    rho_left = np.where(outer_l, rho_l, np.where(in_fan_l, rho_fan_l, rho_star_l))
    u_left = np.where(outer_l, u_l, np.where(in_fan_l, u_fan_l, u_star))
    p_left = np.where(outer_l, p_l, np.where(in_fan_l, p_fan_l, p_star))

    # Right wave (mirror).
    pr_r = p_star / p_r
    shock_r = p_star > p_r
    s_shock_r = u_r + cr * np.sqrt(g2 * pr_r + g1)
    rho_shock_r = rho_r * (pr_r + g6) / (g6 * pr_r + 1.0)
    c_star_r = cr * np.power(pr_r, g1)
    s_head_r = u_r + cr
    s_tail_r = u_star + c_star_r
    u_fan_r = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * u_r + xi)
    c_fan_r = np.maximum(2.0 / (g + 1.0) * (cr - 0.5 * (g - 1.0) * (u_r - xi)), 0.0)
    rho_fan_r = rho_r * np.power(c_fan_r / cr, 2.0 / (g - 1.0))
    p_fan_r = p_r * np.power(c_fan_r / cr, 2.0 * g / (g - 1.0))
    rho_star_r = np.where(shock_r, rho_shock_r, rho_r * np.power(pr_r, 1.0 / g))

    outer_r = np.where(shock_r, s_shock_r < xi, s_head_r < xi)
    in_fan_r = ~shock_r & (s_head_r >= xi) & (s_tail_r < xi)
    rho_right = np.where(outer_r, rho_r, np.where(in_fan_r, rho_fan_r, rho_star_r))
    u_right = np.where(outer_r, u_r, np.where(in_fan_r, u_fan_r, u_star))
    p_right = np.where(outer_r, p_r, np.where(in_fan_r, p_fan_r, p_star))

    rho = np.where(take_left, rho_left, rho_right)
    u = np.where(take_left, u_left, u_right)
    p = np.where(take_left, p_left, p_right)
    return rho, u, p


def two_rarefaction_speeds(left: PolytropicSide, right: PolytropicSide):
    """Wave-speed bounds S_L = u_L - c_L^, S_R = u_R + c_R^.

    The side sound speeds are inflated by the two-rarefaction star-pressure
    estimate, sqrt(1 + (g+1)/(2g) max(p*/p_X - 1, 0)), which bounds the
    exact shock speeds except possibly for near-sonic star pressures.
    """
    g = _check_shared_gamma(left, right)
    p_tr = two_rarefaction_pressure(left, right)
    fac = (g + 1.0) / (2.0 * g)
    c_l = left.sound_speed * np.sqrt(1.0 + fac * np.maximum(p_tr / left.p - 1.0, 0.0))
    c_r = right.sound_speed * np.sqrt(1.0 + fac * np.maximum(p_tr / right.p - 1.0, 0.0))
    return np.asarray(left.u) - c_l, np.asarray(right.u) + c_r


def lagrangian_speeds(left: PolytropicSide, right: PolytropicSide):
    """Approximate Lagrangian sound speeds (a_L, a_R) for the pressure-
    relaxation solver.

    The two-branch evaluation orders the corrections by the pressure jump:
    the side facing the stronger shock gets the direct estimate and the
    other side reuses it, each with a positive-part jump correction that
    guarantees positivity of the intermediate specific volumes.
    """
    g = _check_shared_gamma(left, right)
    rho_l, u_l, p_l = (np.asarray(left.rho, dtype=float),
                       np.asarray(left.u, dtype=float),
                       np.asarray(left.p, dtype=float))
    rho_r, u_r, p_r = (np.asarray(right.rho, dtype=float),
                       np.asarray(right.u, dtype=float),
                       np.asarray(right.p, dtype=float))
    cl, cr = left.sound_speed, right.sound_speed
    fac = 0.5 * (g + 1.0)
    du = u_l - u_r

    # Branch p_R >= p_L: a_L first, then a_R using a_L.
    a_l_1 = rho_l * (cl + fac * np.maximum((p_r - p_l) / (rho_r * cr) + du, 0.0))
    a_r_1 = rho_r * (cr + fac * np.maximum((p_l - p_r) / a_l_1 + du, 0.0))
    # Branch p_R < p_L: a_R first, then a_L using a_R.
    a_r_2 = rho_r * (cr + fac * np.maximum((p_l - p_r) / (rho_l * cl) + du, 0.0))
    a_l_2 = rho_l * (cl + fac * np.maximum((p_r - p_l) / a_r_2 + du, 0.0))

    first = p_r >= p_l
    return np.where(first, a_l_1, a_l_2), np.where(first, a_r_1, a_r_2)


def pressure_relax_star(left: PolytropicSide, right: PolytropicSide,
                        a_l, a_r) -> StarState:
    """Intermediate states of the pressure-relaxation solver.

    All fields are linearly degenerate, so the star values are closed-form
    in the Lagrangian speeds; E_r on each side is taken as e_r + u^2/2 with
    the side's own normal velocity (transverse energy advects unchanged).
    """
    g = _check_shared_gamma(left, right)
    rho_l, u_l, p_l = (np.asarray(left.rho, dtype=float),
                       np.asarray(left.u, dtype=float),
                       np.asarray(left.p, dtype=float))
    rho_r, u_r, p_r = (np.asarray(right.rho, dtype=float),
                       np.asarray(right.u, dtype=float),
                       np.asarray(right.p, dtype=float))
    a_l = np.asarray(a_l, dtype=float)
    a_r = np.asarray(a_r, dtype=float)
    if np.any(a_l <= 0.0) or np.any(a_r <= 0.0):
        raise ValueError("Lagrangian speeds must be positive")

    a_sum = a_l + a_r
    u_star = (a_l * u_l + a_r * u_r + (p_l - p_r)) / a_sum
    p_star = (a_r * p_l + a_l * p_r + a_l * a_r * (u_l - u_r)) / a_sum
    tau_l_star = 1.0 / rho_l + (u_star - u_l) / a_l
    tau_r_star = 1.0 / rho_r + (u_r - u_star) / a_r
    # Should not trigger with the lagrangian_speeds estimates.
    assert np.all(tau_l_star > 0.0) and np.all(tau_r_star > 0.0), \
        "wave-speed estimate failed to keep star specific volumes positive"

    er_l = p_l / ((g - 1.0) * rho_l) + 0.5 * u_l ** 2
    er_r = p_r / ((g - 1.0) * rho_r) + 0.5 * u_r ** 2
    er_l_star = er_l - (p_star * u_star - p_l * u_l) / a_l
    er_r_star = er_r - (p_r * u_r - p_star * u_star) / a_r
    return StarState(p_star=p_star, u_star=u_star,
                     rho_l_star=1.0 / tau_l_star, rho_r_star=1.0 / tau_r_star,
                     er_l_star=er_l_star, er_r_star=er_r_star,
                     a_l=a_l, a_r=a_r)

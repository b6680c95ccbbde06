"""Numerical verification of the entropy structure.

Executable checks for the convexity of the mixture entropy (via the
congruence of its Hessian with an explicit positive diagonal matrix), the
strict convexity of the relaxation entropy in the reduced split variables,
the variational principle of the equilibrium split, and the monotone decay
of the relaxation entropy along homogeneous trajectories.  All checks run
on randomized admissible states spanning several orders of magnitude.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import relax, thermo
from .thermo import SpeciesSet


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one verification suite over a batch of states."""

    name: str
    n_states: int
    n_failed: int
    worst_margin: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.n_failed == 0


def random_states(species: SpeciesSet, dim: int, n: int,
                  rng: np.random.Generator,
                  rho_range=(1e-3, 1e3), e_range=(1e-3, 1e3)) -> np.ndarray:
    """Batch of random admissible states, shape (n_conserved, n).

    Partial densities and energies are log-uniform over the given ranges,
    velocities uniform within three frozen sound speeds.
    """
    ns, nd = species.n_species, species.n_diatomic
    rho_a = np.exp(rng.uniform(np.log(rho_range[0]), np.log(rho_range[1]),
                               size=(ns, n)))
    e_t = np.exp(rng.uniform(np.log(e_range[0]), np.log(e_range[1]), size=n))
    e_v = np.exp(rng.uniform(np.log(e_range[0]), np.log(e_range[1]),
                             size=(nd, n)))
    rho = rho_a.sum(axis=0)
    Y = rho_a / rho
    c = thermo.frozen_sound_speed(species, Y, e_t)
    v = rng.uniform(-3.0, 3.0, size=(dim, n)) * c
    prim = thermo.PrimitiveState(
        Y=Y, rho=rho, v=v, e_t=e_t, e_v=e_v,
        p=thermo.pressure(species, Y, rho, e_t),
        T=thermo.temperature(species, Y, e_t),
        Tv=np.zeros_like(e_v))
    return thermo.primitive_to_conserved(prim, species, dim)


def random_relax_states(species: SpeciesSet, dim: int, n: int,
                        rng: np.random.Generator, gamma,
                        equilibrium: bool = False, **kw) -> np.ndarray:
    """Random relaxed states; off-equilibrium splits unless *equilibrium*."""
    u = random_states(species, dim, n, rng, **kw)
    w = relax.project_P(u, species, dim, gamma)
    if equilibrium:
        return w
    rho_a, mom, rhoEr, rho_ev, rho_es = relax.split_relax(w, species, dim)
    rho, Y, v, e_r, e_s, _ = relax.relax_primitives(w, species, dim)
    # Redistribute the split by a random factor, keeping e_r + e_s fixed.
    frac = rng.uniform(0.05, 0.95, size=e_r.shape)
    e_tot = e_r + e_s
    e_r_new = frac * e_tot
    rhoEr_new = rho * e_r_new + 0.5 * (mom * v).sum(axis=0)
    rho_es_new = rho * (e_tot - e_r_new)
    return np.concatenate([rho_a, mom, rhoEr_new[None], rho_ev,
                           rho_es_new[None]], axis=0)


def hessian_from_gradient(grad_fn, x, steps) -> np.ndarray:
    """Symmetrized Jacobian of *grad_fn* by central differences.

    *x* has shape (n, ...) and grad_fn maps it to the same shape; *steps*
    gives the absolute perturbation per component (same shape as x).
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    H = np.empty((n, n) + x.shape[1:])
    for j in range(n):
        h = steps[j]
        xp = x.copy()
        xm = x.copy()
        xp[j] = x[j] + h
        xm[j] = x[j] - h
        H[:, j] = (grad_fn(xp) - grad_fn(xm)) / (2.0 * h)
    return 0.5 * (H + np.swapaxes(H, 0, 1))


def conserved_fd_steps(u, species: SpeciesSet, dim: int,
                       rel_step: float) -> np.ndarray:
    """Perturbation sizes respecting the state's own physical scales.

    The binding constraint is that no perturbation may move e_t (extracted
    by subtraction from the total energy) by more than its own relative
    scale: vibration and energy components therefore step at the rho e_t
    scale when that is smaller than their own, momentum at a fraction of
    the sound speed capped by the same rule, and species components are
    additionally limited by their formation-enthalpy sensitivity.
    """
    prim = thermo.conserved_to_primitive(u, species, dim, check=False)
    c = thermo.frozen_sound_speed(species, prim.Y, prim.e_t)
    rho_a = prim.Y * prim.rho
    rho_et = prim.rho * prim.e_t
    e_c = 0.5 * (prim.v ** 2).sum(axis=0)
    h0 = thermo._col(species.h0, prim.Y.ndim)
    # |d e_t / d rho_a| = |e_c - e_t - h0_a| / rho <= (e_t + e_c + h0_a)/rho.
    sens_species = (prim.e_t + e_c + h0) / prim.rho
    h_species = np.minimum(rho_a, prim.e_t / sens_species)
    h_mom = np.minimum(prim.rho * c,
                       rho_et / np.maximum(np.abs(prim.v), 1e-3 * c))
    h_energy = rho_et[None]
    if species.n_diatomic:
        h_vib = np.minimum(rho_a[:species.n_diatomic] * prim.e_v,
                           rho_et)
    else:
        h_vib = np.zeros((0,) + np.shape(prim.rho))
    return rel_step * np.concatenate([h_species, h_mom, h_energy, h_vib],
                                     axis=0)


def hessian_from_scalar(fn, x, rel_step: float = 1e-3) -> np.ndarray:
    """Finite-difference Hessian of a scalar function of (n, ...) input.

    Steps are relative to each component (the inputs here are strictly
    positive).  Double differencing floors at eps |f| / h^2, so resolving
    weak curvature directions against a large function value needs steps
    of a percent or so; the truncation this costs is quadratic in the step
    and recoverable by Richardson extrapolation.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    h = rel_step * np.maximum(np.abs(x), 1e-30)
    f0 = fn(x)
    H = np.empty((n, n) + np.shape(f0))

    def shifted(deltas):
        xs = x.copy()
        for j, d in deltas:
            xs[j] = xs[j] + d
        return fn(xs)

    for i in range(n):
        fp = shifted([(i, h[i])])
        fm = shifted([(i, -h[i])])
        H[i, i] = (fp - 2.0 * f0 + fm) / h[i] ** 2
        for j in range(i + 1, n):
            fpp = shifted([(i, h[i]), (j, h[j])])
            fpm = shifted([(i, h[i]), (j, -h[j])])
            fmp = shifted([(i, -h[i]), (j, h[j])])
            fmm = shifted([(i, -h[i]), (j, -h[j])])
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    return H


def check_eta_congruence(u, species: SpeciesSet, dim: int,
                         fd_step: float = 1e-6, tol: float = 1e-4) -> CheckReport:
    """Verify that (du/dZ)^T H_eta (du/dZ) is the expected positive diagonal.

    H_eta is differenced from the analytic entropy gradient (itself checked
    against eta elsewhere), the change-of-variables Jacobian is analytic,
    and the product must be diagonal with entries r_a tau_a, rho/T,
    rho C_vt/T^2 and -rho_b s_b''.  The comparison tolerance combines the
    relative *tol* with a bound on how the finite-difference noise of H
    propagates through the congruence product.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float).T).T  # ensure batch axis
    steps = conserved_fd_steps(u, species, dim, fd_step)
    H = hessian_from_gradient(
        lambda x: thermo.entropy_variables(x, species, dim), u, steps)
    J = thermo.du_dZ(u, species, dim)
    A = np.einsum("ia...,ik...,kb...->ab...", J, H, J)
    D = thermo.congruence_diagonal(u, species, dim)

    # First-order error model for the differenced Hessian.  The gradient's
    # evaluation noise is dominated by the cancellation in extracting e_t
    # from the gross energy (relative error eps * gross/e_t), scaled by each
    # component's sensitivity to theta = 1/T, plus plain eps on the values.
    eps = np.finfo(float).eps
    prim = thermo.conserved_to_primitive(u, species, dim, check=False)
    gross = (np.abs(prim.e_t) + np.tensordot(species.h0, prim.Y, axes=(0, 0))
             + (prim.Y[:species.n_diatomic] * prim.e_v).sum(axis=0)
             + 0.5 * (prim.v ** 2).sum(axis=0))
    theta_rel_noise = eps * gross / prim.e_t
    theta = 1.0 / prim.T
    e_c = 0.5 * (prim.v ** 2).sum(axis=0)
    d_dlntheta = [np.abs(thermo._col(species.h0, prim.Y.ndim) - e_c) * theta
                  + thermo._col(species.cv_tr, prim.Y.ndim),
                  np.abs(theta * prim.v), theta[None]]
    if species.n_diatomic:
        d_dlntheta.append(np.broadcast_to(theta, (species.n_diatomic,)
                                          + np.shape(theta)))
    d_dlntheta = np.concatenate(d_dlntheta, axis=0)
    grad = thermo.entropy_variables(u, species, dim)
    eta_noise = eps * np.abs(grad) + d_dlntheta * theta_rel_noise
    err_H = (eta_noise[:, None] / (2.0 * steps[None, :])
             + eta_noise[None, :] / (2.0 * steps[:, None])
             + fd_step ** 2 * 30.0 * np.abs(H))
    fd_noise = np.einsum("ia...,ik...,kb...->ab...", np.abs(J), err_H,
                         np.abs(J))

    n = u.shape[0]
    idx = np.arange(n)
    scale = np.sqrt(np.abs(D)[:, None] * np.abs(D)[None, :])
    allowance = tol * scale + 3.0 * fd_noise
    err = A.copy()
    err[idx, idx] -= D
    err = np.abs(err)
    margins = err / allowance
    worst = float(margins.max())
    failed = int(np.count_nonzero((margins > 1.0).any(axis=(0, 1))))
    return CheckReport("eta_congruence", u.shape[-1], failed, worst,
                       detail=f"max error/allowance {worst:.3e} "
                              f"(rel tol {tol})")


def _reduced_zeta_fn(species: SpeciesSet, dim: int, gamma):
    """zeta and its analytic gradient in the reduced variables
    (Y_1..Y_{ns-1}, tau, e_r, e_s, ev_1..ev_nd), eliminating the
    minimum-gas-constant species through the unit-sum constraint."""
    ns, nd = species.n_species, species.n_diatomic
    last = int(np.argmin(species.r))
    keep = [a for a in range(ns) if a != last]
    g = float(gamma)

    def unpack(x):
        Yk = x[:ns - 1]
        Y = np.empty((ns,) + x.shape[1:])
        for pos, a in enumerate(keep):
            Y[a] = Yk[pos]
        Y[last] = 1.0 - Yk.sum(axis=0)
        return Y, x[ns - 1], x[ns], x[ns + 1], x[ns + 2:]

    def fn(x):
        Y, tau, e_r, e_s, e_v = unpack(x)
        return relax.zeta(species, Y, tau, e_r, e_s, e_v, g)

    def grad(x):
        Y, tau, e_r, e_s, e_v = unpack(x)
        ndim = Y.ndim
        cva = thermo._col(species.cv_tr, ndim)
        ra = thermo._col(species.r, ndim)
        r = thermo.gas_constant_mix(species, Y)
        cvt = thermo.cv_tr_mix(species, Y)
        gy = r / cvt + 1.0
        A = g - gy
        e_t = e_r + e_s
        L1 = np.log(e_t / e_s)
        L2 = np.log(e_s / e_r)

        # Unconstrained d(-s)/dY_a at fixed (tau, e_t, ev).
        dK = cva * np.log(cva) - cva * np.log(cvt) - cva - ra * np.log(Y) - ra
        ds = cva * np.log(e_t) + ra * np.log(tau) + dK
        if nd:
            sv = thermo.vib_entropy(species, e_v)
            ds = ds + np.concatenate(
                [sv, np.zeros((ns - nd,) + np.shape(tau))], axis=0)
        # Unconstrained d(varsigma)/dY_a at fixed (e_r, e_s).
        G = (ra * cvt - r * cva) / cvt ** 2      # d gamma(Y) / d Y_a
        dvs = (cva * (np.log(A / (g - 1.0)) + L1) - cvt * G / A
               + ra / (g - 1.0) * (np.log((gy - 1.0) / A) + L2)
               + r / (g - 1.0) * (G / (gy - 1.0) + G / A))
        dzeta_dY = -ds + dvs
        g_Y = dzeta_dY[keep] - dzeta_dY[last]

        g_tau = (-r / tau)[None]
        g_er = (-r / ((g - 1.0) * e_r))[None]
        g_es = ((gy - g) / (g - 1.0) * cvt / e_s)[None]
        if nd:
            g_ev = -Y[:nd] * thermo.vib_entropy_prime(species, e_v)
        else:
            g_ev = np.zeros((0,) + np.shape(tau))
        return np.concatenate([g_Y, g_tau, g_er, g_es, g_ev], axis=0)

    def pack(w):
        rho, Y, v, e_r, e_s, yev = relax.relax_primitives(w, species, dim,
                                                          check=False)
        e_v = np.where(Y[:nd] > 0, yev / np.where(Y[:nd] > 0, Y[:nd], 1.0), 0.0) \
            if nd else yev
        return np.concatenate([Y[keep], (1.0 / rho)[None], e_r[None],
                               e_s[None], e_v], axis=0)

    return fn, grad, pack


def check_zeta_convexity(w, species: SpeciesSet, dim: int, gamma,
                         rel_step: float = 1e-6,
                         margin: float = 1e-8) -> CheckReport:
    """Positive definiteness of the relaxation-entropy Hessian.

    Convexity of rho zeta in the conserved variables is equivalent to
    convexity of zeta in the reduced split variables, which is far better
    conditioned to difference numerically.  The Hessian is one central
    difference of the analytic reduced gradient (which the test suite pins
    against value differences), then scaled by the state and
    Jacobi-normalized before the eigenvalue test; positive definiteness is
    invariant under both diagonal congruences, and the scaling makes the
    margin meaningful across states whose raw entries span many decades.
    States that fail the margin at the base step are re-differenced with
    Richardson extrapolation first.
    """
    w = np.atleast_2d(np.asarray(w, dtype=float).T).T
    fn, grad, pack = _reduced_zeta_fn(species, dim, gamma)
    x = pack(w)
    ns = species.n_species

    def steps_for(xs, rel):
        h = rel * np.abs(xs)
        if ns > 1:
            # Composition steps must keep the eliminated fraction positive.
            y_last = 1.0 - xs[:ns - 1].sum(axis=0)
            h[:ns - 1] = rel * np.minimum(xs[:ns - 1], y_last)
        return h

    def eig_ratio(H_raw, xs):
        # Congruence-scale twice: by the state (units) and by the diagonal.
        M = H_raw * xs[:, None] * xs[None, :]
        d = np.einsum("ii...->i...", M)
        bad = (d <= 0.0).any(axis=0) | ~np.isfinite(M).all(axis=(0, 1))
        d_safe = np.where(d > 0.0, d, 1.0)
        s = 1.0 / np.sqrt(d_safe)
        M = M * s[:, None] * s[None, :]
        M = np.moveaxis(M, (0, 1), (-2, -1))
        eig = np.linalg.eigvalsh(M)
        ratio = eig[..., 0] / np.abs(eig).max(axis=-1)
        return np.where(bad, -1.0, ratio)

    H = hessian_from_gradient(grad, x, steps_for(x, rel_step))
    ratio = eig_ratio(H, x)
    retry = ratio <= margin
    if np.any(retry):
        x_retry = x[:, retry]
        h1 = hessian_from_gradient(grad, x_retry, steps_for(x_retry, rel_step))
        h2 = hessian_from_gradient(grad, x_retry,
                                   steps_for(x_retry, rel_step / 2.0))
        ratio = ratio.copy()
        ratio[retry] = eig_ratio((4.0 * h2 - h1) / 3.0, x_retry)
    failed = int(np.count_nonzero(ratio <= margin))
    return CheckReport("zeta_convexity", w.shape[-1], failed,
                       float(ratio.min()),
                       detail=f"min scaled eig ratio {ratio.min():.3e} "
                              f"(margin {margin})")


def check_variational(species: SpeciesSet, Y, tau, e_t, e_v, gamma,
                      tol: float = 1e-9) -> CheckReport:
    """Minimizing zeta over the split recovers the equilibrium and -s."""
    g = float(gamma)
    e_r_star, zeta_min = relax.variational_minimize(species, Y, tau, e_t,
                                                    e_v, g)
    gy = float(thermo.gamma_mix(species, Y, check=False))
    e_r_eq = (gy - 1.0) / (g - 1.0) * float(e_t)
    s = float(thermo.specific_entropy(species, Y, tau, e_t, e_v))
    err_min = abs(e_r_star - e_r_eq) / e_r_eq
    err_val = abs(zeta_min - (-s)) / max(abs(s), 1e-300)
    worst = max(err_min, err_val)
    return CheckReport("variational", 1, int(worst > tol), worst,
                       detail=f"minimizer err {err_min:.3e}, value err {err_val:.3e}")


def check_h_theorem(w0, species: SpeciesSet, dim: int, gamma,
                    epsilon: float, t_end: float, n_steps: int = 100,
                    tol: float = 1e-8) -> CheckReport:
    """Entropy decay and invariants along the homogeneous relaxation flow.

    Checks that rho zeta is non-increasing step to step, that the lifted
    conserved variables stay constant, and that the terminal state matches
    the instantaneous-relaxation projection.
    """
    w0 = np.asarray(w0, dtype=float)
    g = float(gamma)
    dt = t_end / n_steps
    u0 = relax.lift_L(w0, species, dim)
    zeta_prev = relax.relax_entropy(w0, species, dim, g)
    # Monotonicity is judged against the entropy's natural magnitude (the
    # raw value can pass through zero, where a relative measure blows up).
    rho_a = relax.split_relax(w0, species, dim)[0]
    rho = rho_a.sum(axis=0)
    z_scale = np.abs(zeta_prev) + 10.0 * rho * thermo.cv_tr_mix(
        species, rho_a / rho)
    w = w0
    worst_increase = 0.0
    worst_drift = 0.0
    for _ in range(n_steps):
        w = relax.homogeneous_relax_step(w, species, dim, g, epsilon, dt)
        z = relax.relax_entropy(w, species, dim, g)
        worst_increase = max(worst_increase,
                             float(np.max((z - zeta_prev) / z_scale)))
        zeta_prev = z
        u = relax.lift_L(w, species, dim)
        worst_drift = max(worst_drift, float(np.max(
            np.abs(u - u0) / np.maximum(np.abs(u0), 1e-300))))
    w_eq = relax.project_P(u0, species, dim, g)
    # Terminal distance measured against the exact equilibrium, scaled.
    dist = float(np.max(np.abs(w - w_eq)
                        / np.maximum(np.abs(w_eq), np.abs(w0) + 1e-300)))
    ok = (worst_increase <= 1e-12) and (worst_drift <= 1e-12) and (dist <= tol)
    worst = max(worst_increase, worst_drift, dist)
    n_states = int(np.prod(np.shape(w0[-1]))) if np.ndim(w0[-1]) else 1
    return CheckReport("h_theorem", n_states, 0 if ok else 1, worst,
                       detail=(f"max zeta increase {worst_increase:.3e}, invariant "
                               f"drift {worst_drift:.3e}, terminal dist {dist:.3e}"))


def write_report_csv(path, reports) -> None:
    """Write check outcomes as CSV rows (name, states, failed, margin, detail)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "n_states", "n_failed", "worst_margin", "detail"])
        for rep in reports:
            writer.writerow([rep.name, rep.n_states, rep.n_failed,
                             f"{rep.worst_margin:.6e}", rep.detail])


def run_all(species: SpeciesSet, dim: int, trials: int, seed: int = 0,
            gamma=None) -> list[CheckReport]:
    """Run the four suites on *trials* random states each."""
    g = float(gamma if gamma is not None else relax.default_gamma())
    rng = np.random.default_rng(seed)
    u = random_states(species, dim, trials, rng)
    reports = [check_eta_congruence(u, species, dim)]

    w = random_relax_states(species, dim, trials, rng, g)
    reports.append(check_zeta_convexity(w, species, dim, g))

    n_var = 0
    worst = 0.0
    for k in range(trials):
        uk = random_states(species, dim, 1, rng)[:, 0]
        prim = thermo.conserved_to_primitive(uk, species, dim)
        rep = check_variational(species, prim.Y, 1.0 / prim.rho, prim.e_t,
                                prim.e_v, g)
        n_var += rep.n_failed
        worst = max(worst, rep.worst_margin)
    reports.append(CheckReport("variational", trials, n_var, worst))

    w0 = random_relax_states(species, dim, trials, rng, g)
    rep = check_h_theorem(w0, species, dim, g, epsilon=0.04, t_end=1.0)
    reports.append(CheckReport("h_theorem", trials, rep.n_failed,
                               rep.worst_margin, rep.detail))
    return reports

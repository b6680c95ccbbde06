import math

import numpy as np
import pytest

from relaxfv import relax, thermo, verify
from relaxfv.relax import RelaxGamma, default_gamma

from conftest import moderate_states

GAMMA = 1.01 * 5.0 / 3.0


class TestRelaxGamma:
    def test_default(self):
        assert float(default_gamma()) == pytest.approx(GAMMA, rel=1e-15)

    def test_override_accepted(self):
        assert float(RelaxGamma(1.7)) == 1.7

    def test_override_rejected(self):
        with pytest.raises(ValueError):
            RelaxGamma(1.6)
        with pytest.raises(ValueError):
            RelaxGamma(5.0 / 3.0)


class TestEquilibriumSplit:
    def test_monoatomic_value(self, helium):
        F = relax.F_equilibrium(helium, [1.0], 1.0, GAMMA)
        assert F == pytest.approx(0.025, rel=1e-12)

    def test_vanishes_when_gamma_matches(self, helium):
        # Hypothetical gamma == gamma(Y) would zero the numerator; approach it.
        F = relax.F_equilibrium(helium, [1.0], 1.0, 5.0 / 3.0 + 1e-12)
        assert abs(F) < 1e-11

    def test_pressure_consistency(self, mix3, rng):
        u = moderate_states(mix3, 1, 64, rng)
        prim = thermo.conserved_to_primitive(u, mix3, 1)
        gy = thermo.gamma_mix(mix3, prim.Y, check=False)
        e_r = (gy - 1.0) / (GAMMA - 1.0) * prim.e_t
        F = relax.F_equilibrium(mix3, prim.Y, e_r, GAMMA)
        p_mix = thermo.pressure(mix3, prim.Y, prim.rho, e_r + F)
        np.testing.assert_allclose(p_mix, (GAMMA - 1.0) * prim.rho * e_r,
                                   rtol=1e-12)


class TestProjectAndLift:
    def test_split_is_equilibrium(self, mix3, rng):
        u = moderate_states(mix3, 2, 32, rng)
        w = relax.project_P(u, mix3, 2, GAMMA)
        rho, Y, v, e_r, e_s, _ = relax.relax_primitives(w, mix3, 2)
        F = relax.F_equilibrium(mix3, Y, e_r, GAMMA)
        np.testing.assert_allclose(e_s, F, rtol=1e-10)

    def test_split_sums_to_e_t(self, mix3, rng):
        u = moderate_states(mix3, 1, 32, rng)
        _, _, _, e_t = thermo.e_t_from_conserved(u, mix3, 1)
        w = relax.project_P(u, mix3, 1, GAMMA)
        _, _, _, e_r, e_s, _ = relax.relax_primitives(w, mix3, 1)
        np.testing.assert_allclose(e_r + e_s, e_t, rtol=1e-12)

    def test_pure_diatomic_split_value(self, nitrogen):
        prim = thermo.PrimitiveState(
            Y=np.array([1.0]), rho=1.0, v=np.array([0.0]), e_t=1.0,
            e_v=np.array([0.7]), p=None, T=None, Tv=None)
        u = thermo.primitive_to_conserved(prim, nitrogen, 1)
        w = relax.project_P(u, nitrogen, 1, GAMMA)
        _, _, _, e_r, _, _ = relax.relax_primitives(w, nitrogen, 1)
        assert e_r == pytest.approx(0.4 / (GAMMA - 1.0), rel=1e-12)
        assert e_r == pytest.approx(0.58537, abs=5e-6)

    def test_lift_of_project_is_identity(self, mix3, rng):
        u = moderate_states(mix3, 2, 64, rng)
        back = relax.lift_L(relax.project_P(u, mix3, 2, GAMMA), mix3, 2)
        # Non-energy rows are copied bitwise; energy reassembles to round-off.
        ns = mix3.n_species
        assert np.array_equal(back[:ns + 2], u[:ns + 2])
        assert np.array_equal(back[ns + 3:], u[ns + 3:])
        np.testing.assert_allclose(back[ns + 2], u[ns + 2], rtol=1e-13)

    def test_lift_linearity(self, mix3, rng):
        u = moderate_states(mix3, 1, 8, rng)
        w1 = relax.project_P(u, mix3, 1, GAMMA)
        w2 = relax.project_P(moderate_states(mix3, 1, 8, rng), mix3, 1, GAMMA)
        lhs = relax.lift_L(0.3 * w1 + 0.7 * w2, mix3, 1)
        rhs = 0.3 * relax.lift_L(w1, mix3, 1) + 0.7 * relax.lift_L(w2, mix3, 1)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-13)

    def test_lift_without_enthalpy_or_diatomics(self, helium):
        # rhoE = rhoE_r + rho e_s when h0 = 0 and there are no diatomics.
        w = np.array([1.0, 0.5, 2.0, 0.3])  # rho, mom, rhoEr, rho_es
        u = relax.lift_L(w, helium, 1)
        assert u[2] == 2.0 + 0.3

    def test_projection_stays_admissible(self, mix3, rng):
        u = moderate_states(mix3, 1, 64, rng)
        w = relax.project_P(u, mix3, 1, GAMMA)
        rho, Y, v, e_r, e_s, _ = relax.relax_primitives(w, mix3, 1)
        assert np.all(e_r > 0.0) and np.all(e_s > 0.0)


class TestZeta:
    def _random_args(self, mix3, rng, n=32):
        u = moderate_states(mix3, 1, n, rng)
        prim = thermo.conserved_to_primitive(u, mix3, 1)
        return prim

    def test_equilibrium_value_is_minus_entropy(self, mix3, rng):
        prim = self._random_args(mix3, rng)
        gy = thermo.gamma_mix(mix3, prim.Y, check=False)
        e_r = (gy - 1.0) / (GAMMA - 1.0) * prim.e_t
        z = relax.zeta(mix3, prim.Y, 1.0 / prim.rho, e_r, prim.e_t - e_r,
                       prim.e_v, GAMMA)
        s = thermo.specific_entropy(mix3, prim.Y, 1.0 / prim.rho, prim.e_t,
                                    prim.e_v)
        np.testing.assert_allclose(z, -s, rtol=1e-12, atol=1e-12)

    def test_off_equilibrium_exceeds_minus_entropy(self, mix3, rng):
        prim = self._random_args(mix3, rng)
        s = thermo.specific_entropy(mix3, prim.Y, 1.0 / prim.rho, prim.e_t,
                                    prim.e_v)
        for frac in (0.2, 0.5, 0.9):
            e_r = frac * prim.e_t
            z = relax.zeta(mix3, prim.Y, 1.0 / prim.rho, e_r,
                           prim.e_t - e_r, prim.e_v, GAMMA)
            gy = thermo.gamma_mix(mix3, prim.Y, check=False)
            e_r_eq = (gy - 1.0) / (GAMMA - 1.0) * prim.e_t
            off = np.abs(e_r - e_r_eq) > 1e-3 * prim.e_t
            assert np.all(z[off] > -s[off])

    def test_partials_match_finite_differences(self, mix3, rng):
        prim = self._random_args(mix3, rng, n=16)
        tau = 1.0 / prim.rho
        e_r = 0.55 * prim.e_t
        e_s = prim.e_t - e_r
        d_tau, d_er, d_es = relax.zeta_partials(mix3, prim.Y, tau, e_r, e_s,
                                                GAMMA)

        def z(t, r, s):
            return relax.zeta(mix3, prim.Y, t, r, s, prim.e_v, GAMMA)

        for exact, which in ((d_tau, 0), (d_er, 1), (d_es, 2)):
            args = [tau, e_r, e_s]
            h = 1e-6 * args[which]
            hi = list(args)
            lo = list(args)
            hi[which] = hi[which] + h
            lo[which] = lo[which] - h
            fd = (z(*hi) - z(*lo)) / (2.0 * h)
            np.testing.assert_allclose(fd, exact, rtol=1e-6)


class TestVariational:
    def test_minimizer_is_equilibrium_split(self, mix3, rng):
        u = moderate_states(mix3, 1, 10, rng)
        prim = thermo.conserved_to_primitive(u, mix3, 1)
        for k in range(u.shape[1]):
            Y = prim.Y[:, k]
            e_t = prim.e_t[k]
            e_r, zmin = relax.variational_minimize(
                mix3, Y, 1.0 / prim.rho[k], e_t, prim.e_v[:, k], GAMMA)
            gy = float(thermo.gamma_mix(mix3, Y, check=False))
            assert e_r == pytest.approx((gy - 1.0) / (GAMMA - 1.0) * e_t,
                                        rel=1e-10)
            s = float(thermo.specific_entropy(mix3, Y, 1.0 / prim.rho[k],
                                              e_t, prim.e_v[:, k]))
            assert zmin == pytest.approx(-s, rel=1e-10)

    def test_minimizer_ratio_scale_invariant(self, mix3):
        Y = np.array([0.3, 0.2, 0.5])
        e_v = np.array([0.4, 0.6])
        r1, _ = relax.variational_minimize(mix3, Y, 1.0, 1.0, e_v, GAMMA)
        r2, _ = relax.variational_minimize(mix3, Y, 1.0, 2.0, e_v, GAMMA)
        assert r2 / 2.0 == pytest.approx(r1, rel=1e-9)


class TestHomogeneousRelaxation:
    def _off_eq_state(self, mix3, rng, n=16):
        return verify.random_relax_states(mix3, 1, n, rng, GAMMA,
                                          rho_range=(0.1, 10.0),
                                          e_range=(0.1, 10.0))

    def test_invariants_conserved(self, mix3, rng):
        w = self._off_eq_state(mix3, rng)
        u0 = relax.lift_L(w, mix3, 1)
        for _ in range(5):
            w = relax.homogeneous_relax_step(w, mix3, 1, GAMMA, 0.3, 0.17)
        np.testing.assert_allclose(relax.lift_L(w, mix3, 1), u0, rtol=1e-12)

    def test_entropy_non_increasing(self, mix3, rng):
        w = self._off_eq_state(mix3, rng)
        z = relax.relax_entropy(w, mix3, 1, GAMMA)
        for _ in range(40):
            w = relax.homogeneous_relax_step(w, mix3, 1, GAMMA, 0.5, 0.05)
            z_new = relax.relax_entropy(w, mix3, 1, GAMMA)
            assert np.all(z_new <= z + 1e-12 * np.abs(z))
            z = z_new

    def test_infinite_time_limit_is_projection(self, mix3, rng):
        w = self._off_eq_state(mix3, rng)
        w_inf = relax.homogeneous_relax_step(w, mix3, 1, GAMMA, 1e-3, 1e6)
        w_eq = relax.project_P(relax.lift_L(w, mix3, 1), mix3, 1, GAMMA)
        np.testing.assert_allclose(w_inf, w_eq, rtol=1e-10, atol=1e-14)

    def test_equilibrium_is_fixed_point(self, mix3, rng):
        u = moderate_states(mix3, 1, 8, rng)
        w = relax.project_P(u, mix3, 1, GAMMA)
        w2 = relax.homogeneous_relax_step(w, mix3, 1, GAMMA, 0.1, 1.0)
        np.testing.assert_allclose(w2, w, rtol=1e-12)

import numpy as np
import pytest

from relaxfv import cases, solver1d, thermo
from relaxfv.flux import FluxScheme


class TestMaterialInterface:
    def test_side_exponents(self):
        cfg = cases.case_material_interface(16)
        states = cfg.initial_states()
        prim = thermo.conserved_to_primitive(states, cfg.species, 1,
                                             check=False)
        g = thermo.gamma_mix(cfg.species, prim.Y, check=False)
        assert g[0] == pytest.approx(1.4, rel=1e-12)
        assert g[-1] == pytest.approx(5.0 / 3.0, rel=1e-12)

    def test_uniform_velocity_and_pressure(self):
        cfg = cases.case_material_interface(32)
        prim = thermo.conserved_to_primitive(cfg.initial_states(),
                                             cfg.species, 1, check=False)
        np.testing.assert_allclose(prim.v[0], 1.0, rtol=1e-13)
        np.testing.assert_allclose(prim.p, 1.0, rtol=1e-13)

    def test_left_state_values(self):
        cfg = cases.case_material_interface(32)
        prim = thermo.conserved_to_primitive(cfg.initial_states(),
                                             cfg.species, 1, check=False)
        assert prim.rho[0] == pytest.approx(3.607655, rel=1e-12)
        assert prim.rho[-1] == pytest.approx(0.5, rel=1e-12)
        assert prim.e_v[0, 0] == pytest.approx(1.8070291, rel=1e-12)

    def test_exact_solution_is_advected_profile(self):
        cfg = cases.case_material_interface(64)
        grid = cfg.grid()
        rho0, u0, p0 = cfg.exact_primitive(grid.centers, 0.0)
        rho1, u1, p1 = cfg.exact_primitive(grid.centers + 0.2, 0.2)
        np.testing.assert_allclose(rho1, rho0, rtol=1e-12)
        np.testing.assert_array_equal(u1, u0)


class TestAirShockTube:
    def test_equivalent_gamma(self):
        cfg = cases.case_air_shock_tube(16)
        Y = cases.air5_composition(cfg.species)
        assert thermo.gamma_mix(cfg.species, Y) == pytest.approx(1.402,
                                                                 abs=1e-3)

    def test_density_ratio_from_pressure_and_temperature(self):
        cfg = cases.case_air_shock_tube(64)
        prim = thermo.conserved_to_primitive(cfg.initial_states(),
                                             cfg.species, 1)
        assert prim.rho[0] / prim.rho[-1] == pytest.approx(100.0 / 30.0,
                                                           rel=1e-12)

    def test_enthalpies_zeroed(self):
        cfg = cases.case_air_shock_tube(8)
        assert np.all(cfg.species.h0 == 0.0)
        # The database values themselves are nonzero for NO, N, O.
        full = cases.air5_species(zero_enthalpy=False)
        assert np.any(full.h0 > 0.0)

    def test_vibration_in_equilibrium(self):
        cfg = cases.case_air_shock_tube(8)
        prim = thermo.conserved_to_primitive(cfg.initial_states(),
                                             cfg.species, 1)
        np.testing.assert_allclose(prim.Tv[:, 0], prim.T[0], rtol=1e-10)
        np.testing.assert_allclose(prim.Tv[:, -1], prim.T[-1], rtol=1e-10)

    def test_exact_reference_consistency(self):
        # The reference solution at the initial discontinuity limits to the
        # side states away from the fan.
        cfg = cases.case_air_shock_tube(16)
        rho, u, p = cfg.exact_primitive(np.array([0.01, 0.99]), 1e-5)
        prim = thermo.conserved_to_primitive(cfg.initial_states(),
                                             cfg.species, 1)
        assert rho[0] == pytest.approx(prim.rho[0], rel=1e-10)
        assert rho[1] == pytest.approx(prim.rho[-1], rel=1e-10)


class TestSteadyCases:
    def test_sphere_freestream_mach(self):
        cfg = cases.case_sphere(4)
        prim = thermo.conserved_to_primitive(cfg.freestream, cfg.species, 2)
        c = thermo.frozen_sound_speed(cfg.species, prim.Y, prim.e_t)
        assert np.hypot(*prim.v) / c == pytest.approx(15.3, rel=1e-12)
        assert float(prim.rho) == pytest.approx(7.83e-3, rel=1e-12)
        assert float(prim.T) == pytest.approx(293.0, rel=1e-10)
        np.testing.assert_allclose(prim.Tv, 293.0, rtol=1e-10)

    def test_double_cone_freestream(self):
        cfg = cases.case_double_cone(0)
        prim = thermo.conserved_to_primitive(cfg.freestream, cfg.species, 2)
        c = thermo.frozen_sound_speed(cfg.species, prim.Y, prim.e_t)
        assert np.hypot(*prim.v) / c == pytest.approx(11.3, rel=1e-12)
        assert float(prim.Tv[0]) == pytest.approx(3085.0, rel=1e-10)
        Y = prim.Y.ravel()
        assert Y[cfg.species.index("N2")] == pytest.approx(0.99)
        assert Y[cfg.species.index("N")] == pytest.approx(0.01)

    def test_sphere_mesh_size(self):
        cfg = cases.case_sphere(20)
        assert cfg.mesh().n_cells == 400


class TestRunConfigPlumbing:
    def test_grid_spans_domain(self):
        cfg = cases.case_material_interface(50)
        grid = cfg.grid()
        assert grid.n_cells == 50
        assert grid.centers[0] == pytest.approx(0.01)
        assert grid.centers[-1] == pytest.approx(0.99)

    def test_short_run_executes(self):
        cfg = cases.case_material_interface(24, scheme=FluxScheme.hll())
        grid = cfg.grid()
        out, reports = solver1d.run(cfg.initial_states(), grid, cfg.scheme,
                                    0.01, cfg.species)
        assert len(reports) >= 1
        assert np.all(thermo.is_admissible(out, cfg.species, 1))

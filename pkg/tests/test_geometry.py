import math
import os
import sys
import tempfile
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st
from scipy import constants

# Ensure project root is on sys.path for imports
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from lib.constants import CM3_TO_UM3, DEFAULT_G
from lib.errors import ConfigError, DomainError, EmptyLatticeError
from lib.geometry import (Couplings, Geometry, SpinLattice, continuum_domega_ds, expected_spin_count,
                          field_grid, generate_lattice, load_lattice_csv, omega_s, quadrature_domega_ds,
                          save_lattice_csv, shape_f, shape_g, spin_count, sum_domega_ds)

UNIT_GEOM = Geometry(r_max=1.0, z_min=1.0, z_max=2.0)
HALF = Couplings(G=0.5, s=1.0)


def density_for_count(geom, count):
    """cm^-3 density whose expected spin count in geom is `count`."""
    return count / geom.volume / CM3_TO_UM3


class TestOmegaS(unittest.TestCase):
    def test_node_on_the_cone(self):
        z = 0.7
        self.assertAlmostEqual(omega_s(math.sqrt(2) * z, z, Couplings()), 0.0, places=12)

    def test_reduced_units_in_plane(self):
        self.assertAlmostEqual(omega_s(1.0, 0.0, HALF), 1.0, places=12)

    def test_origin_is_singular(self):
        with self.assertRaises(DomainError):
            omega_s(0.0, 0.0, Couplings())

    def test_default_G_matches_physical_constants(self):
        gamma_e = constants.physical_constants['electron gyromag. ratio'][0]
        # mu0 gamma_e^2 hbar / (16 pi), converted from m^3 to um^3
        G = constants.mu_0 * gamma_e ** 2 * constants.hbar / (16 * math.pi) * 1e18
        self.assertAlmostEqual(DEFAULT_G / G, 1.0, delta=1e-3)

    def test_inverse_cube_decay(self):
        c = Couplings()
        self.assertAlmostEqual(omega_s(2.0, 3.0, c) / omega_s(1.0, 1.5, c), 1 / 8, places=12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=0.01, max_value=5.0), st.floats(min_value=-5.0, max_value=5.0))
    def test_odd_in_s_and_even_in_r(self, r, z):
        up = omega_s(r, z, Couplings(s=1.0))
        down = omega_s(r, z, Couplings(s=-1.0))
        self.assertAlmostEqual(up, -down, places=9)
        self.assertAlmostEqual(omega_s(-r, z, Couplings()), up, places=9)


class TestGeometry(unittest.TestCase):
    def test_invalid_heights(self):
        with self.assertRaises(DomainError):
            Geometry(r_max=1.0, z_min=2.0, z_max=1.0)
        with self.assertRaises(DomainError):
            Geometry(r_max=0.0, z_min=1.0, z_max=2.0)

    def test_normalized_constructor(self):
        geom = Geometry.from_normalized(1.87, 4.30, 0.02)
        self.assertAlmostEqual(geom.r_tilde, 1.87, places=12)
        self.assertAlmostEqual(geom.z_tilde, 4.30, places=12)


class TestSpinCount(unittest.TestCase):
    def test_unit_conversion(self):
        self.assertEqual(spin_count(UNIT_GEOM, 1e12), 3)

    def test_doubling_density(self):
        geom = Geometry(r_max=2.0, z_min=1.0, z_max=3.0)
        rho = density_for_count(geom, 250)
        self.assertEqual(spin_count(geom, 2 * rho), 2 * spin_count(geom, rho))
        self.assertAlmostEqual(expected_spin_count(geom, 2e13) / expected_spin_count(geom, 1e13), 2.0, places=12)
        # rounding can split an odd half
        self.assertLessEqual(abs(spin_count(geom, 2e13) - 2 * spin_count(geom, 1e13)), 1)

    def test_optimal_shape_constant(self):
        z_min = 0.05
        rho = 1e18
        geom = Geometry.from_normalized(1.87, 4.30, z_min)
        ratio = spin_count(geom, rho) / (rho * CM3_TO_UM3 * z_min ** 3)
        self.assertAlmostEqual(ratio, 35.9, delta=0.4)


class TestLattice(unittest.TestCase):
    def test_count_matches_expectation(self):
        lat = generate_lattice(UNIT_GEOM, density_for_count(UNIT_GEOM, 1000), seed=3)
        self.assertEqual(lat.count, 1000)

    def test_points_inside_shell(self):
        lat = generate_lattice(UNIT_GEOM, density_for_count(UNIT_GEOM, 500), seed=11)
        r, z = lat.positions[:, 0], lat.positions[:, 1]
        self.assertTrue(np.all(r <= UNIT_GEOM.r_max))
        self.assertTrue(np.all((z >= UNIT_GEOM.z_min) & (z <= UNIT_GEOM.z_max)))

    def test_seeded_lattices_repeat(self):
        rho = density_for_count(UNIT_GEOM, 50)
        a = generate_lattice(UNIT_GEOM, rho, seed=5)
        b = generate_lattice(UNIT_GEOM, rho, seed=5)
        np.testing.assert_array_equal(a.positions, b.positions)

    def test_cubic_grid_stays_inside(self):
        lat = generate_lattice(UNIT_GEOM, density_for_count(UNIT_GEOM, 400), mode='cubic-grid')
        self.assertGreater(lat.count, 0)
        self.assertTrue(np.all(lat.positions[:, 0] <= UNIT_GEOM.r_max))
        self.assertIsNone(lat.seed)

    def test_min_spacing_respected(self):
        lat = generate_lattice(UNIT_GEOM, density_for_count(UNIT_GEOM, 30), seed=2, min_spacing_um=0.1)
        self.assertEqual(lat.count, 30)

    def test_empty_lattice(self):
        with self.assertRaises(EmptyLatticeError):
            generate_lattice(UNIT_GEOM, 1e10)

    def test_unknown_mode(self):
        with self.assertRaises(DomainError):
            generate_lattice(UNIT_GEOM, 1e14, mode='hexagonal')

    def test_monte_carlo_approaches_continuum(self):
        rho = density_for_count(UNIT_GEOM, 1_000_000)
        lat = generate_lattice(UNIT_GEOM, rho, seed=1)
        self.assertAlmostEqual(abs(sum_domega_ds(lat)) / continuum_domega_ds(UNIT_GEOM, rho), 1.0, delta=0.005)

    def test_monte_carlo_error_rate(self):
        counts = (100, 1_000, 10_000)
        spreads = []
        for count in counts:
            rho = density_for_count(UNIT_GEOM, count)
            exact = continuum_domega_ds(UNIT_GEOM, rho)
            errors = [abs(sum_domega_ds(generate_lattice(UNIT_GEOM, rho, seed=seed))) / exact - 1.0
                      for seed in range(64)]
            spreads.append(math.sqrt(np.mean(np.square(errors))))
        slope = np.polyfit(np.log(counts), np.log(spreads), 1)[0]
        self.assertGreaterEqual(slope, -0.6)
        self.assertLessEqual(slope, -0.4)

    def test_csv_round_trip(self):
        lat = generate_lattice(UNIT_GEOM, density_for_count(UNIT_GEOM, 20), seed=9)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'lattice.csv')
            save_lattice_csv(lat, path)
            loaded = load_lattice_csv(path)
            with self.assertRaises(ConfigError):
                save_lattice_csv(lat, path)
        np.testing.assert_allclose(loaded.omegas, lat.omegas, rtol=1e-10)
        self.assertEqual(loaded.seed, 9)
        self.assertAlmostEqual(loaded.density, lat.density, delta=lat.density * 1e-10)


class TestFieldSums(unittest.TestCase):
    def test_single_in_plane_spin(self):
        lat = SpinLattice(positions=np.array([[1.0, 0.0]]),
                          omegas=np.atleast_1d(omega_s(np.array([1.0]), np.array([0.0]), HALF)),
                          density=1.0, couplings=HALF)
        self.assertAlmostEqual(sum_domega_ds(lat), 1.0, places=12)

    def test_lattice_on_the_cone(self):
        z = np.array([0.5, 1.0, 1.5])
        r = math.sqrt(2) * z
        lat = SpinLattice(positions=np.column_stack([r, z]), omegas=omega_s(r, z, Couplings()), density=1.0)
        self.assertAlmostEqual(sum_domega_ds(lat), 0.0, places=9)

    def test_continuum_limits(self):
        rho = 1e13
        G = DEFAULT_G
        tall = Geometry(r_max=1.0, z_min=1.0, z_max=1e7)
        expected = 4 * math.pi * G * rho * CM3_TO_UM3 * (1 - 1 / math.sqrt(2))
        self.assertAlmostEqual(continuum_domega_ds(tall, rho) / expected, 1.0, places=6)
        thin = Geometry(r_max=1e-9, z_min=1.0, z_max=2.0)
        self.assertAlmostEqual(continuum_domega_ds(thin, rho), 0.0, places=12)

    def test_quadrature_oracle(self):
        rho = 1e13
        closed = continuum_domega_ds(UNIT_GEOM, rho)
        numeric = quadrature_domega_ds(UNIT_GEOM, rho)
        self.assertAlmostEqual(numeric / closed, 1.0, delta=1e-6)


class TestShapeFactors(unittest.TestCase):
    def test_published_optima(self):
        self.assertAlmostEqual(shape_f(1.87, 4.30), 4.14, delta=0.01)
        self.assertAlmostEqual(shape_g(0.928, 1.89), 5.32, delta=0.01)

    def test_divergence_near_bottom(self):
        self.assertGreater(shape_f(1.87, 1 + 1e-6), 10 * shape_f(1.87, 4.30))

    def test_domain(self):
        with self.assertRaises(DomainError):
            shape_f(1.0, 1.0)
        with self.assertRaises(DomainError):
            shape_g(0.0, 2.0)

    def test_scale_invariance(self):
        # continuum sum over L^(1/4) depends on z_min only through the normalized shape
        rho = 1e18
        values = []
        for z_min in (0.02, 0.04):
            geom = Geometry.from_normalized(1.87, 4.30, z_min)
            L = rho * CM3_TO_UM3 * geom.volume
            ratio = L ** 0.25 / continuum_domega_ds(geom, rho)
            values.append(ratio * 4 * DEFAULT_G * math.pi ** 0.75 * (rho * CM3_TO_UM3) ** 0.75 / z_min ** 0.75)
        self.assertAlmostEqual(values[0], values[1], places=9)
        self.assertAlmostEqual(values[0], shape_f(1.87, 4.30), places=9)


class TestFieldGrid(unittest.TestCase):
    def test_origin_skipped(self):
        df, skipped = field_grid(np.linspace(0, 2, 5), np.linspace(-2, 2, 5))
        self.assertEqual(skipped, 1)
        self.assertEqual(len(df), 24)
        self.assertEqual(list(df.columns), ['r_um', 'z_um', 'omega_reduced'])


if __name__ == '__main__':
    unittest.main()

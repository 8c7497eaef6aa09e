import math
import os
import sys
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

# Ensure project root is on sys.path for imports
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from lib.dicke import (StateVector, binom_exact, bits_to_index, dicke_x, dicke_z, hadamard_all,
                       log_binom, overlap, popcounts, read_state, xi, zeta)
from lib.errors import CapacityError, DimensionMismatchError, OddSpinCountError


class TestDickeX(unittest.TestCase):
    def test_balanced_four_spin_amplitudes(self):
        state = dicke_x(4, 2)
        self.assertAlmostEqual(state.amplitude('0000').real, 3 / (2 * math.sqrt(6)), places=12)
        self.assertAlmostEqual(state.amplitude('1111').real, 3 / (2 * math.sqrt(6)), places=12)
        self.assertAlmostEqual(state.amplitude('0011').real, -1 / (2 * math.sqrt(6)), places=12)

    def test_raised_four_spin_amplitudes(self):
        state = dicke_x(4, 3)
        self.assertAlmostEqual(state.amplitude('0000').real, 0.5, places=12)
        self.assertAlmostEqual(state.amplitude('0001').real, 0.25, places=12)
        self.assertAlmostEqual(state.amplitude('1111').real, -0.5, places=12)

    def test_product_state_has_uniform_magnitudes(self):
        state = dicke_x(2, 0)
        np.testing.assert_allclose(np.abs(state.amplitudes), 0.5, atol=1e-12)

    def test_bitstring_formats_agree(self):
        self.assertEqual(bits_to_index('0001', 4), 1)
        self.assertEqual(bits_to_index([0, 0, 0, 1], 4), 1)
        self.assertEqual(bits_to_index(1, 4), 1)

    def test_amplitudes_depend_only_on_popcount(self):
        for L in (2, 4, 6, 8):
            weights = popcounts(L)
            for k in range(L + 1):
                amps = dicke_x(L, k).amplitudes
                self.assertTrue(np.allclose(amps.imag, 0.0))
                for w in range(L + 1):
                    shell = amps[weights == w].real
                    self.assertTrue(np.allclose(shell, shell[0]))

    def test_hadamard_maps_to_z_basis(self):
        for L in (2, 4, 6):
            for k in range(L + 1):
                rotated = hadamard_all(dicke_x(L, k))
                self.assertAlmostEqual(abs(overlap(dicke_z(L, k), rotated)), 1.0, places=10)
                off_shell = rotated.amplitudes[popcounts(L) != L - k]
                self.assertLess(np.max(np.abs(off_shell), initial=0.0), 1e-12)

    def test_odd_spin_count_rejected(self):
        with self.assertRaises(OddSpinCountError):
            dicke_x(3, 1)

    def test_capacity(self):
        with self.assertRaises(CapacityError):
            dicke_x(18, 9)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([2, 4, 6, 8, 10]), st.data())
    def test_normalized(self, L, data):
        k = data.draw(st.integers(min_value=0, max_value=L))
        self.assertAlmostEqual(dicke_x(L, k).norm, 1.0, places=12)


class TestCoefficients(unittest.TestCase):
    def test_zeta_all_zero_bitstring(self):
        # 2^{-2} zeta(0000) is the |0000> amplitude 3/(2 sqrt 6)
        self.assertAlmostEqual(zeta('0000', 4), math.sqrt(6), places=12)
        self.assertAlmostEqual(zeta('0000', 4) / 4, 3 / (2 * math.sqrt(6)), places=12)

    def test_xi_single_flip(self):
        self.assertAlmostEqual(xi('0001', 4), 1.0, places=12)

    def test_coefficient_normalization(self):
        for L in (2, 4, 6):
            zetas = [zeta(m, L) for m in range(2 ** L)]
            xis = [xi(m, L) for m in range(2 ** L)]
            self.assertAlmostEqual(sum(z * z for z in zetas) / 2 ** L, 1.0, places=10)
            self.assertAlmostEqual(sum(x * x for x in xis) / 2 ** L, 1.0, places=10)

    def test_direct_and_popcount_paths_agree(self):
        # L=14 goes through the popcount sum; compare to the dense constructor
        L = 14
        state = dicke_x(L, L // 2)
        for m in (0, 1, 3, 0b10101010101010, 2 ** L - 1):
            self.assertAlmostEqual(zeta(m, L) / 2 ** (L / 2), state.amplitudes[m].real, places=12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 8 - 1))
    def test_zeta_complement_symmetry(self, m):
        self.assertAlmostEqual(zeta(m, 8), zeta(m ^ 0xFF, 8), places=12)


class TestReadState(unittest.TestCase):
    def test_overlap_with_balanced_state(self):
        for L in (2, 4, 6, 8):
            value = overlap(read_state(L), dicke_x(L, L // 2))
            self.assertAlmostEqual(value.real, 1 / math.sqrt(2), places=12)
            self.assertAlmostEqual(value.imag, 0.0, places=12)

    def test_overlap_with_raised_state(self):
        value = overlap(read_state(4), dicke_x(4, 3))
        self.assertAlmostEqual(value.real, 0.0, places=12)
        self.assertAlmostEqual(value.imag, -1 / math.sqrt(2), places=12)
        self.assertAlmostEqual(abs(value), 1 / math.sqrt(2), places=12)

    def test_normalized(self):
        for L in (2, 4, 6, 8):
            self.assertAlmostEqual(read_state(L).norm, 1.0, places=12)

    def test_orthogonal_to_lowered_state(self):
        for L in (2, 4, 6):
            self.assertAlmostEqual(abs(overlap(read_state(L), dicke_x(L, L // 2 - 1))), 0.0, places=12)


class TestOverlap(unittest.TestCase):
    def test_self_overlap(self):
        for state in (dicke_x(4, 2), dicke_z(6, 1), read_state(8)):
            self.assertAlmostEqual(overlap(state, state).real, 1.0, places=12)

    def test_distinct_dicke_states_orthogonal(self):
        self.assertAlmostEqual(abs(overlap(dicke_x(4, 2), dicke_x(4, 3))), 0.0, places=12)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            overlap(dicke_x(2, 1), dicke_x(4, 2))
        with self.assertRaises(DimensionMismatchError):
            StateVector(3, np.zeros(4, dtype=complex))


class TestBinomials(unittest.TestCase):
    def test_exact_and_log_forms(self):
        self.assertEqual(binom_exact(12, 6), 924)
        self.assertAlmostEqual(math.exp(log_binom(12, 6)), 924.0, places=8)
        self.assertAlmostEqual(log_binom(200, 100), math.lgamma(201) - 2 * math.lgamma(101), places=8)

    def test_log_binom_is_memoized(self):
        log_binom(70, 35)
        before = log_binom.cache_info().hits
        log_binom(70, 35)
        self.assertEqual(log_binom.cache_info().hits, before + 1)
        self.assertIsInstance(zeta('0110', 4), float)


if __name__ == '__main__':
    unittest.main()

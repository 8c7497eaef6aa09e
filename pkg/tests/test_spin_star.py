import math
import os
import sys
import tempfile
import unittest
import warnings

import numpy as np

# Ensure project root is on sys.path for imports
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from lib.dicke import dicke_x, dicke_z, overlap, read_state
from lib.errors import DomainError, OddSpinCountError, RegimeViolationError, RegimeWarning
from lib.output import read_csv
from lib.spin_star import (LadderState, StarParams, build_u_read, calibrate_soft_pulse, collective_rotation_y,
                           dispersive_hamiltonian, embed_ladder_state, ladder_index, mu_gap,
                           nominal_soft_duration, preparation_schedule, prepare_dicke, readout_probability,
                           soft_pulse, soft_pulse_report, soft_pulse_target, star_hamiltonian, transfer_time)

# dimensionless rates keep eigen-residuals at machine precision
UNIT = StarParams(omega_A=1.0, omega_P=1.0, lam=0.05, lambda_d=5.0)


def block_gap(h, L, k):
    lower = ladder_index(L, 1, k - 1)
    upper = ladder_index(L, 0, k)
    block = h[np.ix_([lower, upper], [lower, upper])]
    values = np.linalg.eigvalsh(block)
    return values[1] - values[0]


class TestSpectrum(unittest.TestCase):
    def test_two_spin_splitting(self):
        h = star_hamiltonian(2, UNIT)
        self.assertAlmostEqual(block_gap(h, 2, 1), 2 * UNIT.lam * math.sqrt(2), places=12)

    def test_gaps_match_closed_form(self):
        for L in (2, 4, 6, 8):
            h = star_hamiltonian(L, UNIT)
            for k in range(1, L + 1):
                self.assertAlmostEqual(block_gap(h, L, k), mu_gap(k - L // 2, L, UNIT.lam), delta=1e-10)

    def test_dressed_eigenvectors(self):
        for L in (2, 4, 8):
            h = star_hamiltonian(L, UNIT)
            for k in range(1, L + 1):
                for sign in (1.0, -1.0):
                    vec = np.zeros(2 * (L + 1), dtype=complex)
                    vec[ladder_index(L, 1, k - 1)] = 1 / math.sqrt(2)
                    vec[ladder_index(L, 0, k)] = sign / math.sqrt(2)
                    energy = np.vdot(vec, h @ vec).real
                    self.assertLess(np.linalg.norm(h @ vec - energy * vec), 1e-10)

    def test_ground_state_energy(self):
        L = 6
        h = star_hamiltonian(L, UNIT)
        ground = LadderState.basis(L, 0, 0).amplitudes
        np.testing.assert_allclose(h @ ground, -(L + 1) / 2 * UNIT.omega_P * ground, atol=1e-12)

    def test_odd_count(self):
        with self.assertRaises(OddSpinCountError):
            star_hamiltonian(3, UNIT)


class TestTransferTime(unittest.TestCase):
    def test_reference_values(self):
        lam = 0.7
        self.assertAlmostEqual(transfer_time(0, 2, lam), math.pi / (2 * math.sqrt(2) * lam), places=12)
        self.assertAlmostEqual(transfer_time(1, 4, lam), math.pi / (2 * math.sqrt(6) * lam), places=12)

    def test_steps_shorten_up_the_ladder(self):
        L = 10
        times = [transfer_time(k, L, 1.0) for k in range(L // 2)]
        self.assertTrue(all(later < earlier for earlier, later in zip(times, times[1:])), times)

    def test_range(self):
        with self.assertRaises(DomainError):
            transfer_time(3, 4, 1.0)


class TestPreparation(unittest.TestCase):
    def test_ideal_climb(self):
        for L in (2, 4, 8, 16, 64):
            _, fid = prepare_dicke(L, UNIT, ideal_pulses=True, rotate=False)
            self.assertGreaterEqual(fid, 1 - 1e-9)

    def test_rotation_matches_dense_construction(self):
        for L in (2, 4, 6, 8, 10):
            state, fid = prepare_dicke(L, UNIT, ideal_pulses=True)
            self.assertGreaterEqual(fid, 1 - 1e-9)
            dense = embed_ladder_state(state)
            self.assertGreaterEqual(abs(overlap(dicke_x(L, L // 2), dense)) ** 2, 1 - 1e-9)

    def test_rotation_convention(self):
        L = 4
        rotated = collective_rotation_y(L) @ np.eye(L + 1)[:, 1]
        dense = embed_ladder_state(LadderState(L, np.concatenate([rotated, np.zeros(L + 1)])))
        self.assertAlmostEqual(overlap(dicke_x(L, 1), dense).real, (-1) ** (L - 1), places=10)

    def finite_fidelities(self, ratios, compensate=False, L=8):
        fidelities = []
        for ratio in ratios:
            p = StarParams(omega_A=1.0, omega_P=1.0, lam=0.01, lambda_d=0.01 * ratio)
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', RegimeWarning)
                fidelities.append(prepare_dicke(L, p, ideal_pulses=False, compensate_pulse_time=compensate)[1])
        return fidelities

    def test_finite_pulses_improve_with_ratio(self):
        fidelities = self.finite_fidelities((10.0, 30.0, 100.0, 300.0))
        self.assertTrue(all(a < b for a, b in zip(fidelities, fidelities[1:])), fidelities)
        self.assertGreaterEqual(fidelities[-1], 0.99)

    def test_compensated_finite_pulses(self):
        plain = self.finite_fidelities((10.0, 30.0, 100.0))
        compensated = self.finite_fidelities((10.0, 30.0, 100.0), compensate=True)
        self.assertTrue(all(a < b for a, b in zip(compensated, compensated[1:])), compensated)
        self.assertGreater(compensated[-1], plain[-1])
        self.assertGreaterEqual(compensated[-1], 0.95)

    def test_hard_pulse_ratio_policy(self):
        p = StarParams(omega_A=1.0, omega_P=1.0, lam=0.01, lambda_d=0.1)
        with self.assertWarns(RegimeWarning):
            prepare_dicke(4, p, ideal_pulses=False)
        with self.assertRaises(RegimeViolationError):
            prepare_dicke(4, p, ideal_pulses=False, strict=True)

    def test_schedule_layout(self):
        for L in (2, 4, 8):
            schedule = preparation_schedule(L, UNIT, ideal_pulses=False)
            frame = schedule.to_frame()
            self.assertEqual(len(frame), L + 2)
            self.assertEqual(frame['type'].iloc[0], 'policy')
            self.assertEqual(frame['type'].iloc[-1], 'collective_rotation')
            self.assertEqual(schedule.count('pi_pulse'), L // 2)
            self.assertEqual(schedule.count('flip_flop'), L // 2)

    def test_schedule_csv(self):
        schedule = preparation_schedule(4, UNIT)
        with tempfile.TemporaryDirectory() as tmp:
            path = schedule.to_csv(os.path.join(tmp, 'schedule.csv'), {'L': 4})
            frame = read_csv(path)
        self.assertEqual(list(frame.columns), ['stage', 'type', 'duration_s', 'frequency_rad_s', 'amplitude_rad_s'])
        self.assertEqual(len(frame), 6)


class TestDispersiveReadout(unittest.TestCase):
    L = 8

    def setUp(self):
        self.params = StarParams.dispersive_defaults(self.L, omega_A=1.0, omega_P=1.0, lam=1e-3)

    def test_transition_frequencies(self):
        h = np.diag(dispersive_hamiltonian(self.L, self.params)).real
        half = self.L // 2
        up = h[ladder_index(self.L, 0, half + 1)] - h[ladder_index(self.L, 0, half)]
        down = h[ladder_index(self.L, 0, half)] - h[ladder_index(self.L, 0, half - 1)]
        shift = self.params.lam ** 2 / self.params.readout_detuning
        self.assertAlmostEqual(up, self.params.omega_P + shift, places=12)
        self.assertAlmostEqual(down, self.params.omega_P - shift, places=12)

    def test_harmonic_without_coupling(self):
        p = StarParams(omega_A=1.0, omega_P=1.0, lam=1e-12, omega_A_readout=2.0)
        gaps = np.diff(np.diag(dispersive_hamiltonian(4, p)).real[:5])
        np.testing.assert_allclose(gaps, p.omega_P, atol=1e-12)

    def test_dispersive_requirement(self):
        p = StarParams(omega_A=1.0, omega_P=1.0, lam=0.01, omega_A_readout=1.01)
        with self.assertRaises(RegimeViolationError):
            dispersive_hamiltonian(4, p)

    def test_calibrated_soft_pulse(self):
        duration, fid = calibrate_soft_pulse(self.L, self.params)
        self.assertGreaterEqual(fid, 0.99)
        out = soft_pulse(LadderState.basis(self.L, 0, self.L // 2), self.params, duration)
        self.assertAlmostEqual(abs(np.vdot(soft_pulse_target(self.L), out.amplitudes)) ** 2, fid, places=9)

    def test_zero_duration_is_identity(self):
        state = LadderState.basis(self.L, 0, 3)
        out = soft_pulse(state, self.params, 0.0)
        np.testing.assert_array_equal(out.amplitudes, state.amplitudes)

    def test_leakage_shrinks_with_selectivity(self):
        reports = []
        for selectivity in (1 / 10, 1 / 30, 1 / 100):
            p = StarParams.dispersive_defaults(self.L, selectivity=selectivity, omega_A=1.0, omega_P=1.0, lam=1e-3)
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', RegimeWarning)
                reports.append(soft_pulse_report(self.L, p, strict=False))
        leaks = [r['leak_down'] + r['leak_up'] for r in reports]
        self.assertTrue(all(a > b for a, b in zip(leaks, leaks[1:])), leaks)
        self.assertLess(leaks[-1], 5e-3)
        self.assertGreater(reports[-1]['fidelity'], reports[0]['fidelity'])

    def test_selectivity_policy(self):
        p = StarParams.dispersive_defaults(self.L, selectivity=0.2, omega_A=1.0, omega_P=1.0, lam=1e-3)
        with self.assertRaises(RegimeViolationError):
            soft_pulse(LadderState.basis(self.L, 0, 4), p, 1.0)
        with self.assertWarns(RegimeWarning):
            soft_pulse(LadderState.basis(self.L, 0, 4), p, 1.0, strict=False)


class TestReadoutUnitary(unittest.TestCase):
    def test_ideal_fidelity(self):
        for L in (2, 4, 6, 8, 10):
            p = StarParams.dispersive_defaults(L, omega_A=1.0, omega_P=1.0, lam=1e-3)
            report = build_u_read(L, p, ideal=True)
            self.assertGreaterEqual(report.fidelity, 1 - 1e-6)
            self.assertEqual(report.target_source, 'dicke-core')

    def test_large_ladder_target(self):
        report = build_u_read(12, UNIT, ideal=True)
        self.assertEqual(report.target_source, 'ladder-rotation')
        self.assertGreaterEqual(report.fidelity, 1 - 1e-6)

    def test_measurement_equivalence(self):
        L = 6
        u_read = build_u_read(L, UNIT, ideal=True).unitary
        read = np.array([overlap(dicke_z(L, k), read_state(L)) for k in range(L + 1)])
        rng = np.random.default_rng(17)
        for _ in range(20):
            vectors = rng.normal(size=(L + 1, 2)) + 1j * rng.normal(size=(L + 1, 2))
            rho = vectors @ vectors.conj().T
            rho /= np.trace(rho).real
            direct = np.vdot(read, rho @ read).real
            self.assertAlmostEqual(readout_probability(u_read, rho), direct, delta=1e-9)

    def test_non_ideal_readout(self):
        L = 4
        p = StarParams.dispersive_defaults(L, omega_A=1.0, omega_P=1.0, lam=1e-3, lambda_d=0.1)
        calibrated = build_u_read(L, p, ideal=False)
        self.assertGreaterEqual(calibrated.fidelity, 0.9)
        halved = build_u_read(L, p, ideal=False, soft_duration=calibrated.soft_pulse_duration / 2)
        self.assertLess(halved.fidelity, 0.9)

    def test_nominal_duration(self):
        p = StarParams.dispersive_defaults(8, omega_A=1.0, omega_P=1.0, lam=1e-3)
        self.assertAlmostEqual(nominal_soft_duration(8, p) * p.soft_rabi * math.sqrt(20), math.pi, places=12)


if __name__ == '__main__':
    unittest.main()

"""
Global-control simulation of a spin-star system: one ancilla qubit coupled
to L probe spins, restricted to the ancilla (x) symmetric Dicke ladder.

Basis index a*(L+1) + k with ancilla a in {0, 1} (sigma_z = -1, +1) and
|k> the z-basis Dicke state with k probe spins up. Preparation and hard
pulses are simulated in the frame rotating with the bare resonant energies;
the soft pulse is simulated in the frame of its drive. Frame changes happen
when a single ladder level is populated, so they only add a global phase.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import expm

from lib.dicke import StateVector, dicke_z, overlap, read_state
from lib.errors import DomainError, OddSpinCountError, RegimeViolationError, RegimeWarning
from lib.optimizer import minimize_scalar
from lib.output import write_csv

logger = logging.getLogger(__name__)

HARD_PULSE_MIN_RATIO = 100.0
DISPERSIVE_MIN_FACTOR = 20.0
SELECTIVITY_MAX_RATIO = 1.0 / 20.0
DICKE_EMBED_MAX_L = 10
SCHEDULE_COLUMNS = ['stage', 'type', 'duration_s', 'frequency_rad_s', 'amplitude_rad_s']

_ANC_SIGMA_Z = np.diag([-1.0, 1.0])
_ANC_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_ANC_SIGMA_Y = np.array([[0.0, 1j], [-1j, 0.0]])
_ANC_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|
_ANC_GROUND = np.diag([1.0, 0.0])


@dataclass
class StarParams:
    """Frequencies and Rabi rates, all in rad/s."""
    omega_A: float = 2 * math.pi * 3.0e9           # ancilla, preparation stage
    omega_P: float = 2 * math.pi * 3.0e9           # probe spins
    lam: float = 2 * math.pi * 1.0e6               # collective transverse coupling
    lambda_d: float = 2 * math.pi * 1.0e8          # ancilla Rabi (hard pulse)
    lambda_dp: Optional[float] = None              # probe collective Rabi (soft pulse)
    omega_d: Optional[float] = None                # ancilla drive, defaults to omega_A
    omega_dp: Optional[float] = None               # soft-pulse drive, defaults to omega_P + chi
    omega_A_readout: Optional[float] = None        # ancilla frequency after retuning

    @property
    def readout_detuning(self) -> float:
        omega_A = self.omega_A_readout if self.omega_A_readout is not None else self.omega_A
        return omega_A - self.omega_P

    @property
    def chi(self) -> float:
        """Dispersive shift lambda^2 / (omega_A - omega_P) at readout."""
        detuning = self.readout_detuning
        if detuning == 0:
            raise RegimeViolationError("dispersive shift undefined at zero detuning")
        return self.lam ** 2 / detuning

    @property
    def soft_drive(self) -> float:
        return self.omega_dp if self.omega_dp is not None else self.omega_P + self.chi

    @property
    def soft_rabi(self) -> float:
        # default keeps the selectivity ratio at 1/50
        return self.lambda_dp if self.lambda_dp is not None else 2.0 * abs(self.chi) / 50.0

    @classmethod
    def dispersive_defaults(cls, L: int, detuning_factor: float = 60.0,
                            selectivity: float = 1.0 / 50.0, **kwargs) -> 'StarParams':
        """Parameters with readout detuning detuning_factor * lam * sqrt(L) and a given selectivity."""
        params = cls(**kwargs)
        params.omega_A_readout = params.omega_P + detuning_factor * params.lam * math.sqrt(L)
        params.lambda_dp = 2.0 * abs(params.chi) * selectivity
        return params


@dataclass
class LadderState:
    """Amplitudes over the ancilla (x) Dicke ladder, length 2(L+1)."""
    L: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2 * (self.L + 1),):
            raise DomainError(f"ladder state for L={self.L} needs {2 * (self.L + 1)} amplitudes")

    @classmethod
    def basis(cls, L: int, a: int, k: int) -> 'LadderState':
        amplitudes = np.zeros(2 * (L + 1), dtype=complex)
        amplitudes[ladder_index(L, a, k)] = 1.0
        return cls(L, amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def evolve(self, unitary: np.ndarray) -> 'LadderState':
        return LadderState(self.L, unitary @ self.amplitudes)


@dataclass
class PulseSchedule:
    """Ordered pulse/evolution stages; the first row is the policy line."""
    rows: List[dict] = field(default_factory=list)

    def add(self, kind: str, duration: float, frequency: float, amplitude: float):
        self.rows.append({
            'stage': len(self.rows),
            'type': kind,
            'duration_s': float(duration),
            'frequency_rad_s': float(frequency),
            'amplitude_rad_s': float(amplitude),
        })

    def count(self, kind: str) -> int:
        return sum(1 for row in self.rows if row['type'] == kind)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=SCHEDULE_COLUMNS)

    def to_csv(self, path: str, values: Optional[dict] = None, overwrite: bool = False) -> str:
        return write_csv(self.to_frame(), path, 'pulse-schedule', values or {}, overwrite=overwrite)


@dataclass
class ReadoutReport:
    unitary: np.ndarray
    fidelity: float
    soft_pulse_duration: float
    schedule: PulseSchedule
    target_source: str


def ladder_index(L: int, a: int, k: int) -> int:
    if a not in (0, 1) or not 0 <= k <= L:
        raise DomainError(f"ladder level (a={a}, k={k}) outside L={L}")
    return a * (L + 1) + k


def _check_even(L: int):
    if L <= 0 or L % 2:
        raise OddSpinCountError(f"spin-star protocols need a positive even L, got {L}")


def raising_operator(L: int) -> np.ndarray:
    """J_+ on z-Dicke states: J_+|k> = sqrt((k+1)(L-k)) |k+1>."""
    op = np.zeros((L + 1, L + 1))
    for k in range(L):
        op[k + 1, k] = math.sqrt((k + 1) * (L - k))
    return op


def collective_operators(L: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(J_x, J_y, J_z) on the (L+1)-dimensional symmetric subspace."""
    j_plus = raising_operator(L)
    j_minus = j_plus.T
    j_x = (j_plus + j_minus) / 2.0
    j_y = (j_plus - j_minus) / 2j
    j_z = np.diag(np.arange(L + 1) - L / 2.0)
    return j_x, j_y, j_z


def _on_probes(op: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), op)


def _on_ancilla(op: np.ndarray, L: int) -> np.ndarray:
    return np.kron(op, np.eye(L + 1))


def flip_flop(L: int, lam: float) -> np.ndarray:
    """lam (|0><1| J_+ + |1><0| J_-); <0,k|V|1,k-1> = lam sqrt(k(L-k+1))."""
    j_plus = raising_operator(L)
    return lam * (np.kron(_ANC_LOWER, j_plus) + np.kron(_ANC_LOWER.T, j_plus.T))


def star_hamiltonian(L: int, p: StarParams, resonant: bool = True) -> np.ndarray:
    """
    Spin-star Hamiltonian on the ladder basis.

    Args:
        L: Even number of probe spins
        p: Parameters; resonant=True sets the ancilla frequency to omega_P
        resonant: Use the preparation-stage resonance condition

    Returns:
        Hermitian 2(L+1) x 2(L+1) matrix
    """
    _check_even(L)
    omega_A = p.omega_P if resonant else p.omega_A
    j_z = np.diag(np.arange(L + 1) - L / 2.0)
    h = p.omega_P * _on_probes(j_z) + omega_A / 2.0 * _on_ancilla(_ANC_SIGMA_Z, L)
    return (h + flip_flop(L, p.lam)).astype(complex)


def mu_gap(n: int, L: int, lam: float) -> float:
    """Splitting 2 lam sqrt(L/2 (L/2+1) - n(n-1)) of the block {|1, D_{n-1}>, |0, D_n>}."""
    j = L / 2.0
    return 2.0 * lam * math.sqrt(j * (j + 1) - n * (n - 1))


def transfer_time(k: int, L: int, lam: float) -> float:
    """Half Rabi period moving |1, k> to |0, k+1>: pi / (2 lam sqrt((k+1)(L-k)))."""
    if not 0 <= k < L / 2:
        raise DomainError(f"transfer index k={k} outside [0, {L // 2})")
    return math.pi / (2.0 * lam * math.sqrt((k + 1) * (L - k)))


def collective_rotation_y(L: int, angle: float = math.pi / 2) -> np.ndarray:
    """exp(-i angle J_y) on the symmetric subspace."""
    _, j_y, _ = collective_operators(L)
    return expm(-1j * angle * j_y)


def check_hard_pulses(p: StarParams, strict: bool):
    ratio = p.lambda_d / p.lam
    if ratio < HARD_PULSE_MIN_RATIO:
        message = f"hard-pulse ratio lambda_d/lambda = {ratio:.3g} below {HARD_PULSE_MIN_RATIO:g}"
        if strict:
            raise RegimeViolationError(message)
        warnings.warn(message, RegimeWarning, stacklevel=3)


def check_dispersive(L: int, p: StarParams):
    needed = DISPERSIVE_MIN_FACTOR * p.lam * math.sqrt(L)
    if abs(p.readout_detuning) < needed:
        raise RegimeViolationError(
            f"detuning {abs(p.readout_detuning):.4g} rad/s below dispersive requirement {needed:.4g} rad/s"
        )


def selectivity_ratio(p: StarParams) -> float:
    return p.soft_rabi / (2.0 * abs(p.chi))


def check_selectivity(p: StarParams, strict: bool):
    ratio = selectivity_ratio(p)
    if ratio > SELECTIVITY_MAX_RATIO:
        message = f"soft-pulse selectivity {ratio:.3g} exceeds {SELECTIVITY_MAX_RATIO:.3g}"
        if strict:
            raise RegimeViolationError(message)
        warnings.warn(message, RegimeWarning, stacklevel=3)


def _preparation(L: int, p: StarParams, ideal_pulses: bool, compensate_pulse_time: bool,
                 rotate: bool) -> Tuple[np.ndarray, PulseSchedule]:
    schedule = PulseSchedule()
    schedule.add('policy', 0.0, p.omega_P, 0.0)
    coupling = flip_flop(L, p.lam)
    unitary = np.eye(2 * (L + 1), dtype=complex)
    _, j_y, _ = collective_operators(L)

    pulse_time = 0.0 if ideal_pulses else math.pi / p.lambda_d
    if ideal_pulses:
        flip = _on_ancilla(_ANC_SIGMA_X, L)
    else:
        flip = expm(-1j * pulse_time * (coupling + p.lambda_d / 2.0 * _on_ancilla(_ANC_SIGMA_Y, L)))

    for k in range(L // 2):
        wait = transfer_time(k, L, p.lam)
        if compensate_pulse_time and not ideal_pulses:
            wait = max(wait - pulse_time / 2.0, 0.0)
        unitary = expm(-1j * wait * coupling) @ flip @ unitary
        schedule.add('pi_pulse', pulse_time, p.omega_d or p.omega_A, p.lambda_d)
        schedule.add('flip_flop', wait, p.omega_A, p.lam)

    if rotate:
        if ideal_pulses:
            rotation = _on_probes(collective_rotation_y(L))
            rotation_time = 0.0
        else:
            rotation_time = math.pi / (2.0 * p.lambda_d)
            rotation = expm(-1j * rotation_time * (coupling + p.lambda_d * _on_probes(j_y)))
        unitary = rotation @ unitary
        schedule.add('collective_rotation', rotation_time, p.omega_P, p.lambda_d)
    return unitary, schedule


def embed_ladder_state(state: LadderState, ancilla: int = 0) -> StateVector:
    """Probe part of one ancilla branch as a dense 2^L vector."""
    L = state.L
    dense = np.zeros(2 ** L, dtype=complex)
    for k in range(L + 1):
        dense += state.amplitudes[ladder_index(L, ancilla, k)] * dicke_z(L, k).amplitudes
    return StateVector(L, dense)


def x_dicke_ladder(L: int, k: int) -> np.ndarray:
    """|D^L_k>_x on the probe ladder, via exp(-i pi J_y / 2)|k>_z = (-1)^(L-k) |D_k>_x."""
    basis = np.zeros(L + 1, dtype=complex)
    basis[k] = 1.0
    return (-1) ** (L - k) * (collective_rotation_y(L) @ basis)


def read_state_ladder(L: int) -> np.ndarray:
    """|0> (x) |Read> on the full ladder basis."""
    read = (x_dicke_ladder(L, L // 2) + 1j * x_dicke_ladder(L, L // 2 + 1)) / math.sqrt(2.0)
    return np.concatenate([read, np.zeros(L + 1, dtype=complex)])


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def preparation_schedule(L: int, p: StarParams, ideal_pulses: bool = True) -> PulseSchedule:
    _check_even(L)
    return _preparation(L, p, ideal_pulses, False, rotate=True)[1]


def prepare_dicke(L: int, p: StarParams, ideal_pulses: bool = True, strict: bool = False,
                  compensate_pulse_time: bool = False, rotate: bool = True) -> Tuple[LadderState, float]:
    """
    Run the L/2-step ladder climb from |0>|D_0> and the final collective rotation.

    Args:
        L: Even number of probe spins
        p: Spin-star parameters
        ideal_pulses: Instantaneous ancilla flips instead of finite hard pulses
        strict: Raise instead of warn on a hard-pulse ratio below 100
        compensate_pulse_time: Shorten each flip-flop wait by half a pulse
        rotate: Apply exp(-i pi J_y / 2) at the end

    Returns:
        (final state, fidelity with |0>|D_{L/2}>_x, or with |0>|D_{L/2}>_z when rotate=False)
    """
    _check_even(L)
    if not ideal_pulses:
        check_hard_pulses(p, strict)
    unitary, _ = _preparation(L, p, ideal_pulses, compensate_pulse_time, rotate)
    state = LadderState.basis(L, 0, 0).evolve(unitary)

    target = np.zeros(2 * (L + 1), dtype=complex)
    if rotate:
        target[:L + 1] = x_dicke_ladder(L, L // 2)
    else:
        target[ladder_index(L, 0, L // 2)] = 1.0
    result = fidelity(target, state.amplitudes)
    logger.debug("prepare_dicke L=%d ideal=%s fidelity=%.12f", L, ideal_pulses, result)
    return state, result


def dispersive_hamiltonian(L: int, p: StarParams) -> np.ndarray:
    """
    omega_P J_z + (omega_A/2) sigma_z - chi sigma_z J_z^2 with chi = lam^2/(omega_A - omega_P),
    diagonal on the ladder basis.
    """
    _check_even(L)
    check_dispersive(L, p)
    omega_A = p.omega_P + p.readout_detuning
    m = np.arange(L + 1) - L / 2.0
    diagonal = []
    for sigma in (-1.0, 1.0):
        diagonal.extend(p.omega_P * m + omega_A / 2.0 * sigma - p.chi * sigma * m ** 2)
    return np.diag(np.array(diagonal, dtype=complex))


def _soft_generator(L: int, p: StarParams) -> np.ndarray:
    j_x, _, j_z = collective_operators(L)
    h_eff = dispersive_hamiltonian(L, p)
    # drive lambda_dp J_x cos(omega_dp t) in its rotating frame, counter-rotating part dropped
    return h_eff - p.soft_drive * _on_probes(j_z) + p.soft_rabi / 2.0 * _on_probes(j_x)


def soft_pulse(state: LadderState, p: StarParams, duration: float, strict: bool = True) -> LadderState:
    """Evolve under the dispersive Hamiltonian plus the selective drive for `duration` seconds."""
    check_selectivity(p, strict)
    if duration < 0:
        raise DomainError(f"pulse duration must be nonnegative, got {duration}")
    if duration == 0:
        return LadderState(state.L, state.amplitudes.copy())
    return state.evolve(expm(-1j * duration * _soft_generator(state.L, p)))


def nominal_soft_duration(L: int, p: StarParams) -> float:
    """pi / (lambda_dp sqrt(L/2 (L/2+1))): a pi/2 rotation between k = L/2 and L/2+1."""
    j = L / 2.0
    return math.pi / (p.soft_rabi * math.sqrt(j * (j + 1)))


def soft_pulse_target(L: int) -> np.ndarray:
    """(|0,D_{L/2}> - i|0,D_{L/2+1}>)/sqrt(2); the y rotation turns this into |Read>."""
    target = np.zeros(2 * (L + 1), dtype=complex)
    target[ladder_index(L, 0, L // 2)] = 1.0 / math.sqrt(2.0)
    target[ladder_index(L, 0, L // 2 + 1)] = -1j / math.sqrt(2.0)
    return target


def calibrate_soft_pulse(L: int, p: StarParams, strict: bool = True, tol_fraction: float = 1e-6) -> Tuple[float, float]:
    """
    Duration maximizing the soft-pulse target fidelity from |0, D_{L/2}>.

    Returns:
        (duration_s, fidelity)
    """
    check_selectivity(p, strict)
    start = LadderState.basis(L, 0, L // 2)
    target = soft_pulse_target(L)
    generator = _soft_generator(L, p)
    nominal = nominal_soft_duration(L, p)

    def infidelity(scale: float) -> float:
        evolved = expm(-1j * scale * nominal * generator) @ start.amplitudes
        return 1.0 - fidelity(target, evolved)

    best = minimize_scalar(infidelity, 0.7, 1.3, tol=tol_fraction)
    logger.debug("soft pulse L=%d calibrated to %.6f x nominal, fidelity %.9f", L, best.x, 1 - best.value)
    return best.x * nominal, 1.0 - best.value


def soft_pulse_report(L: int, p: StarParams, strict: bool = True) -> dict:
    """Target fidelity and leakage into |D_{L/2-1}>, |D_{L/2+2}> after a calibrated pulse."""
    duration, target_fidelity = calibrate_soft_pulse(L, p, strict)
    out = soft_pulse(LadderState.basis(L, 0, L // 2), p, duration, strict=strict)
    populations = np.abs(out.amplitudes) ** 2
    return {
        'L': L,
        'selectivity': selectivity_ratio(p),
        'duration_s': duration,
        'fidelity': target_fidelity,
        'leak_down': float(populations[ladder_index(L, 0, L // 2 - 1)]),
        'leak_up': float(populations[ladder_index(L, 0, L // 2 + 2)]) if L // 2 + 2 <= L else 0.0,
    }


def _ideal_soft_unitary(L: int) -> np.ndarray:
    lower = ladder_index(L, 0, L // 2)
    upper = ladder_index(L, 0, L // 2 + 1)
    generator = np.zeros((2 * (L + 1), 2 * (L + 1)), dtype=complex)
    generator[lower, upper] = generator[upper, lower] = math.pi / 4.0
    return expm(-1j * generator)


def _read_target(L: int) -> Tuple[np.ndarray, str]:
    if L <= DICKE_EMBED_MAX_L:
        # dense read state projected back onto the symmetric ladder
        dense = read_state(L)
        ladder = np.array([overlap(dicke_z(L, k), dense) for k in range(L + 1)])
        return np.concatenate([ladder, np.zeros(L + 1, dtype=complex)]), 'dicke-core'
    return read_state_ladder(L), 'ladder-rotation'


def build_u_read(L: int, p: StarParams, ideal: bool = True, strict: bool = False,
                 soft_duration: Optional[float] = None) -> ReadoutReport:
    """
    Compose preparation, soft pulse and the final exp(-i pi J_y / 2).

    Args:
        L: Even number of probe spins
        p: Spin-star parameters
        ideal: Exact stages (instantaneous flips, exact two-level soft rotation)
        strict: Raise on regime violations instead of warning
        soft_duration: Override of the calibrated soft-pulse duration (non-ideal mode)

    Returns:
        ReadoutReport with U_Read and |<0, Read| U_Read |0, D_0>|^2
    """
    _check_even(L)
    prep, schedule = _preparation(L, p, ideal, False, rotate=False)
    readout_configured = p.omega_A_readout is not None
    if ideal:
        pulse = _ideal_soft_unitary(L)
        duration = nominal_soft_duration(L, p) if readout_configured else 0.0
    else:
        check_hard_pulses(p, strict)
        check_dispersive(L, p)
        if soft_duration is None:
            soft_duration, _ = calibrate_soft_pulse(L, p, strict)
        duration = soft_duration
        check_selectivity(p, strict)
        pulse = expm(-1j * duration * _soft_generator(L, p))
    if readout_configured:
        schedule.add('soft_pulse', duration, p.soft_drive, p.soft_rabi)
    else:
        schedule.add('soft_pulse', duration, p.omega_P, 0.0)

    rotation = _on_probes(collective_rotation_y(L))
    schedule.add('collective_rotation', 0.0, p.omega_P, p.lambda_d)
    unitary = rotation @ pulse @ prep

    target, source = _read_target(L)
    initial = LadderState.basis(L, 0, 0).amplitudes
    result = fidelity(target, unitary @ initial)
    logger.info("U_Read L=%d ideal=%s fidelity=%.12f (target via %s)", L, ideal, result, source)
    return ReadoutReport(unitary=unitary, fidelity=result, soft_pulse_duration=duration,
                         schedule=schedule, target_source=source)


def readout_probability(u_read: np.ndarray, rho_probe: np.ndarray) -> float:
    """<0, D_0| U_Read^dag (|0><0| (x) rho) U_Read |0, D_0> for rho on the probe ladder."""
    L = rho_probe.shape[0] - 1
    full = np.kron(_ANC_GROUND, rho_probe)
    initial = LadderState.basis(L, 0, 0).amplitudes
    evolved = u_read @ initial
    return float(np.real(np.vdot(evolved, full @ evolved)))

"""
Exact evolution of the Dicke probe under inhomogeneous fields and
Gaussian-in-time dephasing.

The density matrix solves

    d rho/dt = i[H, rho] - (t/T2^2) sum_j (rho - Z_j rho Z_j),  H = sum_n omega_n Z_n / 2

element by element:

    rho_mm'(t) = rho_mm'(0) exp[i sum_n (omega_n t/2)((-1)^m_n - (-1)^m'_n)] exp[-(t/T2)^2 HD(m, m')]

so rho(t) = diag(c) K diag(c*) with c_m = init_m e^{i phi_m} and the Hamming
kernel K = (x) [[1, e], [e, 1]], e = exp(-(t/T2)^2).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lib.constants import EXACT_P_CAP, EXACT_P_DIRECT_MAX, RK4_CAP
from lib.dicke import StateVector, bits_to_index, dicke_x, popcounts
from lib.errors import (CapacityError, DimensionMismatchError, DomainError,
                        OddSpinCountError, StepCountError)
from lib.geometry import SpinLattice

logger = logging.getLogger(__name__)

RICHARDSON_TOLERANCE = 1e-8
DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class DephasingChannel:
    """Interaction time t, dephasing time T2 (T2*) and per-spin fields."""
    T2: float            # s
    t: float             # s
    fields: np.ndarray   # rad/s, one entry per probe spin

    def __post_init__(self):
        if self.T2 <= 0:
            raise DomainError(f"T2 must be positive, got {self.T2}")
        if self.t < 0:
            raise DomainError(f"interaction time must be nonnegative, got {self.t}")

    @classmethod
    def from_lattice(cls, lat: SpinLattice, T2: float, t: float, s: Optional[float] = None) -> 'DephasingChannel':
        s = lat.couplings.s if s is None else s
        return cls(T2=T2, t=t, fields=np.asarray(lat.fields(s), dtype=float))

    @property
    def num_spins(self) -> int:
        return int(len(self.fields))

    @property
    def damping(self) -> float:
        """Off-diagonal factor per differing bit, exp(-(t/T2)^2)."""
        return math.exp(-(self.t / self.T2) ** 2)

    def with_fields(self, fields: np.ndarray) -> 'DephasingChannel':
        return DephasingChannel(T2=self.T2, t=self.t, fields=np.asarray(fields, dtype=float))


@dataclass(frozen=True)
class ProbabilityTerms:
    """p = term_dd/2 + term_d1d1/2 - term_cross."""
    term_dd: float
    term_d1d1: float
    term_cross: float
    p: float


def _spin_signs(L: int) -> np.ndarray:
    """(2^L, L) array of (-1)^{m_n}; column n is spin n (most significant bit first)."""
    indices = np.arange(2 ** L, dtype=np.int64)[:, None]
    shifts = np.arange(L - 1, -1, -1, dtype=np.int64)[None, :]
    return 1.0 - 2.0 * ((indices >> shifts) & 1)


def phases(ch: DephasingChannel) -> np.ndarray:
    """phi_m = sum_n (omega_n t / 2)(-1)^{m_n} for every basis index m."""
    L = ch.num_spins
    return _spin_signs(L) @ (np.asarray(ch.fields, dtype=float) * ch.t / 2.0)


def _hamming_distance(m: int, m_prime: int) -> int:
    return bin(m ^ m_prime).count('1')


def rho_element(m, m_prime, ch: DephasingChannel, init: StateVector) -> complex:
    """
    Closed-form density-matrix element rho_mm'(t) for the initial pure state init.

    Args:
        m: Row bitstring (int, '0101' string or bit sequence)
        m_prime: Column bitstring
        ch: Dephasing channel
        init: Initial state on the same number of qubits

    Returns:
        Complex matrix element
    """
    L = init.num_qubits
    if ch.num_spins != L:
        raise DimensionMismatchError(f"channel has {ch.num_spins} fields for a {L}-qubit state")
    row = bits_to_index(m, L)
    col = bits_to_index(m_prime, L)
    signs = _spin_signs(L)
    half_fields = np.asarray(ch.fields, dtype=float) * ch.t / 2.0
    phase = float(np.dot(half_fields, signs[row] - signs[col]))
    decay = math.exp(-((ch.t / ch.T2) ** 2) * _hamming_distance(row, col))
    return complex(init.amplitudes[row] * np.conj(init.amplitudes[col]) * np.exp(1j * phase) * decay)


def density_matrix_direct(ch: DephasingChannel, init: StateVector) -> np.ndarray:
    """Full 2^L x 2^L density matrix from the closed form (small L only)."""
    L = init.num_qubits
    if L > EXACT_P_DIRECT_MAX:
        raise CapacityError(f"direct density matrix limited to L <= {EXACT_P_DIRECT_MAX}, got {L}")
    c = init.amplitudes * np.exp(1j * phases(ch))
    counts = popcounts(L)
    indices = np.arange(2 ** L)
    hamming = counts[np.bitwise_xor.outer(indices, indices)]
    return np.outer(c, np.conj(c)) * np.exp(-((ch.t / ch.T2) ** 2) * hamming)


def apply_hamming_kernel(vector: np.ndarray, damping: float) -> np.ndarray:
    """
    w_m = sum_d damping^{|d|} v_{m XOR d}, summed shell by shell through the
    tensor-product structure of the kernel; O(L 2^L).
    """
    L = int(round(math.log2(len(vector))))
    factor = np.array([[1.0, damping], [damping, 1.0]])
    tensor = np.asarray(vector, dtype=complex).reshape((2,) * L)
    for axis in range(L):
        tensor = np.moveaxis(np.tensordot(factor, tensor, axes=([1], [axis])), 0, axis)
    return tensor.reshape(2 ** L)


def _check_probe_channel(lat: Optional[SpinLattice], ch: DephasingChannel, cap: int) -> int:
    L = ch.num_spins
    if lat is not None and lat.count != L:
        raise DimensionMismatchError(f"lattice has {lat.count} spins but channel has {L} fields")
    if L % 2:
        raise OddSpinCountError(f"exact_p needs an even spin count, got L={L}")
    if L > cap:
        raise CapacityError(f"exact_p limited to L <= {cap}, got {L}")
    return L


def exact_p(lat: Optional[SpinLattice], ch: DephasingChannel, cap: int = EXACT_P_CAP,
            method: str = 'auto') -> ProbabilityTerms:
    """
    Exact readout probability p = <Read| rho(t) |Read> for the Dicke probe.

    Args:
        lat: Lattice the fields came from (None when only fields are given)
        ch: Dephasing channel; its fields define H
        cap: Largest supported L
        method: 'direct' (full 4^L matrix, L <= 8), 'shell' (Hamming-shell
                reduction) or 'auto' (direct up to L = 8, shell above)

    Returns:
        ProbabilityTerms with the three diagnostic terms and p
    """
    L = _check_probe_channel(lat, ch, cap)
    if method == 'auto':
        method = 'direct' if L <= EXACT_P_DIRECT_MAX else 'shell'

    probe = dicke_x(L, L // 2, cap=max(cap, L))
    raised = dicke_x(L, L // 2 + 1, cap=max(cap, L))
    D = probe.amplitudes
    D1 = raised.amplitudes

    if method == 'direct':
        rho = density_matrix_direct(ch, probe)
        rho_D = rho @ D
        rho_D1 = rho @ D1
    elif method == 'shell':
        c = D * np.exp(1j * phases(ch))
        damping = ch.damping
        rho_D = c * apply_hamming_kernel(np.conj(c) * D, damping)
        rho_D1 = c * apply_hamming_kernel(np.conj(c) * D1, damping)
    else:
        raise DomainError(f"unknown exact_p method {method!r}")

    term_dd = float(np.real(np.vdot(D, rho_D)))
    term_d1d1 = float(np.real(np.vdot(D1, rho_D1)))
    term_cross = float(np.imag(np.vdot(D, rho_D1)))
    p = 0.5 * term_dd + 0.5 * term_d1d1 - term_cross
    if not -1e-10 <= p <= 1 + 1e-10:
        logger.warning("exact_p out of [0, 1]: %.3e (L=%d, method=%s)", p, L, method)
    logger.debug("exact_p L=%d method=%s p=%.15f", L, method, p)
    return ProbabilityTerms(term_dd=term_dd, term_d1d1=term_d1d1, term_cross=term_cross, p=p)


def _rk4_run(rho0: np.ndarray, hamiltonian: np.ndarray, signs: np.ndarray,
             T2: float, t_final: float, steps: int) -> np.ndarray:
    def generator(t_now: float, rho: np.ndarray) -> np.ndarray:
        commutator = hamiltonian @ rho - rho @ hamiltonian
        dephased = np.zeros_like(rho)
        for column in signs.T:
            dephased += rho - column[:, None] * rho * column[None, :]
        return 1j * commutator - (t_now / T2 ** 2) * dephased

    dt = t_final / steps
    rho = rho0.copy()
    t_now = 0.0
    for _ in range(steps):
        k1 = generator(t_now, rho)
        k2 = generator(t_now + dt / 2, rho + dt / 2 * k1)
        k3 = generator(t_now + dt / 2, rho + dt / 2 * k2)
        k4 = generator(t_now + dt, rho + dt * k3)
        rho = rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t_now += dt
    return rho


def integrate_master_equation(lat: Optional[SpinLattice], ch: DephasingChannel, steps: int = 1000,
                              init: Optional[StateVector] = None) -> np.ndarray:
    """
    Fourth-order fixed-step integration of the dephasing master equation.

    Args:
        lat: Lattice the fields came from (None allowed)
        ch: Channel giving fields, T2 and the final time
        steps: Number of RK4 steps; the run is repeated with 2*steps as a check
        init: Initial pure state, defaults to the balanced x-basis Dicke probe

    Returns:
        Density matrix at time ch.t (from the 2*steps run)
    """
    L = ch.num_spins
    if lat is not None and lat.count != L:
        raise DimensionMismatchError(f"lattice has {lat.count} spins but channel has {L} fields")
    if L > RK4_CAP:
        raise CapacityError(f"RK4 oracle limited to L <= {RK4_CAP}, got {L}")
    if steps < 1:
        raise StepCountError(f"need at least one step, got {steps}")

    init = init if init is not None else dicke_x(L, L // 2)
    rho0 = np.outer(init.amplitudes, np.conj(init.amplitudes))
    signs = _spin_signs(L)
    hamiltonian = np.diag(signs @ (np.asarray(ch.fields, dtype=float) / 2.0)).astype(complex)

    if ch.t == 0:
        return rho0
    coarse = _rk4_run(rho0, hamiltonian, signs, ch.T2, ch.t, steps)
    fine = _rk4_run(rho0, hamiltonian, signs, ch.T2, ch.t, 2 * steps)
    difference = float(np.max(np.abs(fine - coarse)))
    logger.debug("RK4 L=%d steps=%d richardson=%.2e", L, steps, difference)
    if difference > RICHARDSON_TOLERANCE:
        raise StepCountError(
            f"{steps} steps too few: steps vs 2*steps differ by {difference:.2e} > {RICHARDSON_TOLERANCE:g}"
        )
    return fine


def delta_s_empirical(lat: SpinLattice, ch: DephasingChannel, T: float,
                      fd_step: float = DEFAULT_FD_STEP, cap: int = EXACT_P_CAP) -> float:
    """
    Error-propagation uncertainty of s from N = T/t repetitions.

    Args:
        lat: Lattice providing d omega_j / ds
        ch: Channel at the operating point
        T: Total measurement time (s)
        fd_step: Central-difference step in s

    Returns:
        sqrt(p(1-p)) / (sqrt(N) |dp/ds|), or inf when there is no signal
    """
    if ch.t <= 0:
        raise DomainError("delta_s_empirical needs a positive interaction time")
    if T <= 0:
        raise DomainError(f"total time must be positive, got {T}")
    repetitions = T / ch.t

    slope_fields = np.asarray(lat.omegas, dtype=float)
    p0 = exact_p(lat, ch, cap).p
    p_plus = exact_p(lat, ch.with_fields(ch.fields + fd_step * slope_fields), cap).p
    p_minus = exact_p(lat, ch.with_fields(ch.fields - fd_step * slope_fields), cap).p
    slope = (p_plus - p_minus) / (2.0 * fd_step)

    if abs(slope) < 1e-300:
        logger.warning("dp/ds vanishes; uncertainty is infinite")
        return math.inf
    return math.sqrt(max(p0 * (1.0 - p0), 0.0)) / (math.sqrt(repetitions) * abs(slope))

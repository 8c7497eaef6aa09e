"""
Dicke-state construction over the L-qubit computational basis.

Bit convention: bit value 0 is the sigma_z = +1 eigenstate. Bitstrings are
read left to right, so spin 0 is the most significant bit of the index and
"0001" is index 1.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from lib.constants import DENSE_STATE_CAP
from lib.errors import CapacityError, DimensionMismatchError, DomainError, OddSpinCountError

logger = logging.getLogger(__name__)

Bitstring = Union[int, str, Sequence[int]]

# Largest n for which binomials are kept as exact integers
EXACT_BINOM_MAX_N = 64
# Largest L for which zeta/xi are summed over explicit permutations
DIRECT_COEFF_MAX_L = 12

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the 2^L computational basis."""
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2 ** self.num_qubits,):
            raise DimensionMismatchError(
                f"expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, m: Bitstring) -> complex:
        return complex(self.amplitudes[bits_to_index(m, self.num_qubits)])


def bits_to_index(m: Bitstring, L: int) -> int:
    """Convert an int, a '0101' string or a bit sequence to a basis index."""
    if isinstance(m, (int, np.integer)):
        index = int(m)
    elif isinstance(m, str):
        if len(m) != L or set(m) - {'0', '1'}:
            raise DimensionMismatchError(f"bitstring {m!r} is not {L} bits")
        index = int(m, 2)
    else:
        bits = list(m)
        if len(bits) != L:
            raise DimensionMismatchError(f"bit sequence has {len(bits)} entries, expected {L}")
        index = 0
        for bit in bits:
            index = (index << 1) | (int(bit) & 1)
    if not 0 <= index < 2 ** L:
        raise DimensionMismatchError(f"index {index} out of range for {L} bits")
    return index


def popcounts(L: int) -> np.ndarray:
    """Number of 1 bits for every index in [0, 2^L)."""
    indices = np.arange(2 ** L, dtype=np.int64)
    counts = np.zeros(2 ** L, dtype=np.int64)
    for shift in range(L):
        counts += (indices >> shift) & 1
    return counts


def binom_exact(n: int, k: int) -> int:
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


@lru_cache(maxsize=None)
def log_binom(n: int, k: int) -> float:
    """Natural log of binom(n, k); -inf outside the support."""
    if k < 0 or k > n or n < 0:
        return -math.inf
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def binom_value(n: int, k: int) -> float:
    """binom(n, k) as a float, exact integers up to n = 64 and log-space beyond."""
    if n <= EXACT_BINOM_MAX_N:
        return float(binom_exact(n, k))
    return math.exp(log_binom(n, k))


def krawtchouk(L: int, ones: int, weight: int) -> int:
    """
    Sum of (-1)^<j,m> over all masks j with `ones` set bits, for any m of
    popcount `weight`. Exact integer.
    """
    total = 0
    for overlap_bits in range(0, min(weight, ones) + 1):
        term = binom_exact(weight, overlap_bits) * binom_exact(L - weight, ones - overlap_bits)
        total += -term if overlap_bits % 2 else term
    return total


def _check_probe_size(L: int, cap: int = DENSE_STATE_CAP):
    if L < 0:
        raise DomainError(f"number of qubits must be nonnegative, got {L}")
    if L % 2:
        raise OddSpinCountError(f"Dicke probes need an even number of spins, got L={L}")
    if L > cap:
        raise CapacityError(f"dense state for L={L} exceeds cap {cap}")


def dicke_x(L: int, k: int, cap: int = DENSE_STATE_CAP) -> StateVector:
    """
    Symmetric superposition of k |+> and L-k |-> spins, in the z basis.

    Args:
        L: Even number of spins
        k: Number of spins in the sigma_x = +1 state, 0 <= k <= L
        cap: Largest L allowed for the dense vector

    Returns:
        Normalized StateVector; the |00...0> amplitude is real and positive
    """
    _check_probe_size(L, cap)
    if not 0 <= k <= L:
        raise DomainError(f"excitation number k={k} outside [0, {L}]")

    # Amplitude depends on m only through popcount(m); minus-state masks have L-k ones
    shell = np.array([krawtchouk(L, L - k, w) for w in range(L + 1)], dtype=float)
    scale = 1.0 / math.sqrt(binom_value(L, k) * 2 ** L)
    amplitudes = (shell[popcounts(L)] * scale).astype(complex)
    return StateVector(L, amplitudes)


def dicke_z(L: int, k: int, cap: int = DENSE_STATE_CAP) -> StateVector:
    """z-basis Dicke state with k spins up (bit 0), support on popcount L-k."""
    if L > cap:
        raise CapacityError(f"dense state for L={L} exceeds cap {cap}")
    if not 0 <= k <= L:
        raise DomainError(f"excitation number k={k} outside [0, {L}]")
    amplitudes = np.zeros(2 ** L, dtype=complex)
    amplitudes[popcounts(L) == L - k] = 1.0 / math.sqrt(binom_value(L, k))
    return StateVector(L, amplitudes)


def _coefficient(m: Bitstring, L: int, minus_count: int, k: int) -> float:
    _check_probe_size(L, cap=max(L, DENSE_STATE_CAP))
    index = bits_to_index(m, L)
    if L <= DIRECT_COEFF_MAX_L:
        # explicit permutation sum over minus-position masks
        set_bits = {i for i in range(L) if (index >> (L - 1 - i)) & 1}
        total = 0
        for positions in itertools.combinations(range(L), minus_count):
            total += -1 if len(set_bits.intersection(positions)) % 2 else 1
    else:
        total = krawtchouk(L, minus_count, bin(index).count('1'))
    return total / math.sqrt(binom_value(L, k))


def zeta(m: Bitstring, L: int) -> float:
    """
    Coefficient of |m> in |D^L_{L/2}>_x = 2^{-L/2} sum_m zeta(m) |m>.
    """
    return _coefficient(m, L, L // 2, L // 2)


def xi(m: Bitstring, L: int) -> float:
    """
    Coefficient of |m> in |D^L_{L/2+1}>_x = 2^{-L/2} sum_m xi(m) |m>.
    The masks mark the L/2 - 1 spins in |->.
    """
    return _coefficient(m, L, L // 2 - 1, L // 2 + 1)


def read_state(L: int, cap: int = DENSE_STATE_CAP) -> StateVector:
    """Readout state (|D_{L/2}>_x + i |D_{L/2+1}>_x) / sqrt(2)."""
    balanced = dicke_x(L, L // 2, cap)
    raised = dicke_x(L, L // 2 + 1, cap)
    amplitudes = (balanced.amplitudes + 1j * raised.amplitudes) / math.sqrt(2.0)
    return StateVector(L, amplitudes)


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugating a."""
    if a.num_qubits != b.num_qubits:
        raise DimensionMismatchError(
            f"cannot overlap {a.num_qubits}-qubit and {b.num_qubits}-qubit states"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_single_qubit_all(state: StateVector, gate: np.ndarray) -> StateVector:
    """Apply the same 2x2 gate to every qubit."""
    L = state.num_qubits
    tensor = state.amplitudes.reshape((2,) * L) if L else state.amplitudes.copy()
    for axis in range(L):
        tensor = np.moveaxis(np.tensordot(gate, tensor, axes=([1], [axis])), 0, axis)
    return StateVector(L, np.asarray(tensor, dtype=complex).reshape(2 ** L))


def hadamard_all(state: StateVector) -> StateVector:
    return apply_single_qubit_all(state, _HADAMARD)

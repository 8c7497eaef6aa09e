"""
Brute-force oracles for the combinatorics behind the closed-form readout
probability, the closed forms themselves, and the NV-NV interaction
invariance of the bright/dark Dicke state.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from lib.constants import ENUMERATION_CAP, EXACT_P_DIRECT_MAX, QUTRIT_CAP
from lib.dicke import binom_exact
from lib.errors import CapacityError, DimensionMismatchError, DomainError, OddSpinCountError
from lib.evolution import DephasingChannel, ProbabilityTerms, exact_p
from lib.geometry import SpinLattice

logger = logging.getLogger(__name__)

# qutrit site basis order
BRIGHT, ZERO, DARK = 0, 1, 2


@dataclass(frozen=True)
class DuplicationCount:
    L: int
    n: int
    formula_value: Fraction
    enumeration_value: int

    @property
    def agrees(self) -> bool:
        return self.formula_value.denominator == 1 and self.formula_value == self.enumeration_value


@dataclass(frozen=True)
class QutritChainState:
    """Amplitudes over {B, 0, D}^L."""
    L: int
    amplitudes: np.ndarray


@dataclass(frozen=True)
class NVInvarianceReport:
    L: int
    h1_norm: float         # ||H'|D>||
    h2_eigenvalue: float   # <D|H''|D>
    h2_residual: float     # ||H''|D> - c|D>||


@dataclass(frozen=True)
class ClosedFormComparison:
    closed_form: ProbabilityTerms
    exact: ProbabilityTerms

    @property
    def discrepancy(self) -> float:
        return abs(self.closed_form.p - self.exact.p)


def _check_enumeration(L: int):
    if L % 2 or L <= 0:
        raise OddSpinCountError(f"duplication counts need a positive even L, got {L}")
    if L > ENUMERATION_CAP:
        raise CapacityError(f"enumeration limited to L <= {ENUMERATION_CAP}, got {L}")


def _masks_with_weight(L: int, weight: int) -> list:
    masks = []
    for positions in itertools.combinations(range(L), weight):
        mask = 0
        for position in positions:
            mask |= 1 << position
        masks.append(mask)
    return masks


def _count_pairs(L: int, first_weight: int, second_weight: int, mask: int) -> int:
    second = set(_masks_with_weight(L, second_weight))
    return sum(1 for j in _masks_with_weight(L, first_weight) if (j ^ mask) in second)


def count_balanced_pairs(L: int, n: int) -> DuplicationCount:
    """
    Balanced pairs (j1, j2) with j1 XOR j2 equal to a fixed weight-2n mask,
    against binom(L, L/2) binom(L/2, n)^2 / binom(L, 2n).
    """
    _check_enumeration(L)
    if not 0 <= n <= L // 2:
        raise DomainError(f"n={n} outside [0, {L // 2}]")
    half = L // 2
    formula = Fraction(binom_exact(L, half) * binom_exact(half, n) ** 2, binom_exact(L, 2 * n))
    enumeration = _count_pairs(L, half, half, (1 << (2 * n)) - 1)
    return DuplicationCount(L=L, n=n, formula_value=formula, enumeration_value=enumeration)


def count_mixed_pairs(L: int, n: int) -> DuplicationCount:
    """
    Pairs (j balanced, l with L/2+1 ones) with j XOR l equal to a fixed
    weight-(2n-1) mask, against binom(L,L/2) binom(L/2,n-1) binom(L/2,n) / binom(L,2n-1).
    """
    _check_enumeration(L)
    if not 1 <= n <= L // 2:
        raise DomainError(f"n={n} outside [1, {L // 2}]; there is no weight -1 mask")
    half = L // 2
    formula = Fraction(binom_exact(L, half) * binom_exact(half, n - 1) * binom_exact(half, n),
                       binom_exact(L, 2 * n - 1))
    enumeration = _count_pairs(L, half, half + 1, (1 << (2 * n - 1)) - 1)
    return DuplicationCount(L=L, n=n, formula_value=formula, enumeration_value=enumeration)


def balanced_identity_holds(L: int) -> bool:
    """sum_n binom(L/2, n)^2 == binom(L, L/2)."""
    half = L // 2
    return sum(binom_exact(half, n) ** 2 for n in range(half + 1)) == binom_exact(L, half)


def _balanced_overlap(L: int, n: int) -> float:
    # <D|Z^{d}|D> for a weight-2n mask d
    return binom_exact(2 * n, n) * binom_exact(L - 2 * n, L // 2 - n) / binom_exact(L, L // 2)


def _mixed_overlap(L: int, n: int) -> float:
    # <D|Z^{d}|D'> for a weight-(2n-1) mask d
    half = L // 2
    duplication = binom_exact(L, half) * binom_exact(half, n - 1) * binom_exact(half, n) / binom_exact(L, 2 * n - 1)
    return duplication / math.sqrt(binom_exact(L, half) * binom_exact(L, half + 1))


def shell_weights(L: int, x: float) -> np.ndarray:
    """w_s = (1-q)^(L-s) q^s with q = (1 - e^{-x})/2, x = (t/T2)^2."""
    q = (1.0 - math.exp(-x)) / 2.0
    s = np.arange(L + 1)
    return (1.0 - q) ** (L - s) * q ** s


def tanh_weights(L: int, x: float) -> np.ndarray:
    """Same weights as e^{-L x/2} cosh(x/2)^L tanh(x/2)^s."""
    s = np.arange(L + 1)
    return math.exp(-L * x / 2.0) * math.cosh(x / 2.0) ** L * math.tanh(x / 2.0) ** s


def closed_form_terms(L: int, t: float, T2: float, sum_omega: float, weights: str = 'product') -> ProbabilityTerms:
    """
    Shell-sum closed forms of the three readout-probability terms.

    The two diagonal terms are exact for vanishing fields; the cross term is
    first order in t sum_omega and assumes the fields enter only through their sum.

    Args:
        L: Even spin count
        t: Interaction time (s)
        T2: Dephasing time (s)
        sum_omega: Sum of the per-spin fields (rad/s)
        weights: 'product' or the equivalent 'tanh' evaluation of the shell weights

    Returns:
        ProbabilityTerms built from the closed forms
    """
    if L % 2 or L <= 0:
        raise OddSpinCountError(f"closed forms need a positive even L, got {L}")
    x = (t / T2) ** 2
    w = shell_weights(L, x) if weights == 'product' else tanh_weights(L, x)
    half = L // 2

    term_dd = sum(w[2 * n] * binom_exact(L, 2 * n) * _balanced_overlap(L, n) ** 2 for n in range(half + 1))
    term_d1d1 = sum(w[2 * n - 1] * binom_exact(L, 2 * n - 1) * _mixed_overlap(L, n) ** 2
                    for n in range(1, half + 1))

    slope = 0.0
    for n in range(1, half + 1):
        lower = binom_exact(L - 1, 2 * n - 2) * _balanced_overlap(L, n - 1) * (w[2 * n - 2] - w[2 * n - 1])
        upper = binom_exact(L - 1, 2 * n - 1) * _balanced_overlap(L, n) * (w[2 * n] - w[2 * n - 1])
        slope += _mixed_overlap(L, n) * (lower + upper)
    term_cross = -(t / 2.0) * sum_omega * slope

    p = 0.5 * term_dd + 0.5 * term_d1d1 - term_cross
    return ProbabilityTerms(term_dd=float(term_dd), term_d1d1=float(term_d1d1),
                            term_cross=float(term_cross), p=float(p))


def exact_p_smallL_by_terms(L: int, lat: Optional[SpinLattice], ch: DephasingChannel) -> ProbabilityTerms:
    """Closed-form terms for the channel's fields; the gap to exact_p is logged."""
    if L > EXACT_P_DIRECT_MAX:
        raise CapacityError(f"closed-form comparison limited to L <= {EXACT_P_DIRECT_MAX}, got {L}")
    if ch.num_spins != L:
        raise DimensionMismatchError(f"channel has {ch.num_spins} fields, expected {L}")
    terms = closed_form_terms(L, ch.t, ch.T2, float(np.sum(ch.fields)))
    logger.debug("closed form vs exact at L=%d: %.3e", L, abs(terms.p - exact_p(lat, ch).p))
    return terms


def compare_closed_form(lat: Optional[SpinLattice], ch: DephasingChannel) -> ClosedFormComparison:
    L = ch.num_spins
    return ClosedFormComparison(closed_form=exact_p_smallL_by_terms(L, lat, ch), exact=exact_p(lat, ch))


def bright_dark_dicke(L: int) -> QutritChainState:
    """Symmetric superposition of all arrangements of L/2 B and L/2 D sites."""
    if L % 2 or L <= 0:
        raise OddSpinCountError(f"need a positive even L, got {L}")
    if L > QUTRIT_CAP:
        raise CapacityError(f"qutrit chain limited to L <= {QUTRIT_CAP}, got {L}")
    amplitudes = np.zeros(3 ** L, dtype=complex)
    arrangements = list(itertools.combinations(range(L), L // 2))
    for dark_sites in arrangements:
        digits = [DARK if site in dark_sites else BRIGHT for site in range(L)]
        index = 0
        for digit in digits:
            index = 3 * index + digit
        amplitudes[index] = 1.0
    amplitudes /= math.sqrt(len(arrangements))
    return QutritChainState(L, amplitudes)


def _pair_operator(entries) -> np.ndarray:
    op = np.zeros((9, 9))
    for (a_out, b_out), (a_in, b_in) in entries:
        op[3 * a_out + b_out, 3 * a_in + b_in] = 1.0
    return op


FLIP_FLOP_PAIR = _pair_operator([
    ((BRIGHT, ZERO), (ZERO, BRIGHT)), ((ZERO, BRIGHT), (BRIGHT, ZERO)),
    ((DARK, ZERO), (ZERO, DARK)), ((ZERO, DARK), (DARK, ZERO)),
])
MIXED_PAIR = _pair_operator([((BRIGHT, DARK), (BRIGHT, DARK)), ((DARK, BRIGHT), (DARK, BRIGHT))])


def apply_pair_hamiltonian(state: QutritChainState, pair_op: np.ndarray, couplings: np.ndarray) -> np.ndarray:
    """sum_{j<k} couplings[j, k] * pair_op acting on sites (j, k)."""
    L = state.L
    couplings = np.asarray(couplings, dtype=float)
    if couplings.shape != (L, L):
        raise DimensionMismatchError(f"couplings must be {L}x{L}, got {couplings.shape}")
    tensor = state.amplitudes.reshape((3,) * L)
    op = pair_op.reshape(3, 3, 3, 3)
    result = np.zeros_like(tensor)
    for j in range(L):
        for k in range(j + 1, L):
            if couplings[j, k] == 0:
                continue
            moved = np.tensordot(op, tensor, axes=([2, 3], [j, k]))
            result += couplings[j, k] * np.moveaxis(moved, [0, 1], [j, k])
    return result.reshape(3 ** L)


def uniform_couplings(L: int, g: float = 1.0) -> np.ndarray:
    """Permutation-invariant (all-to-all) couplings."""
    return g * (np.ones((L, L)) - np.eye(L))


def ring_couplings(L: int, g: float = 1.0) -> np.ndarray:
    """Nearest neighbours on a ring."""
    couplings = np.zeros((L, L))
    for j in range(L):
        k = (j + 1) % L
        couplings[j, k] = couplings[k, j] = g
    return couplings


def random_couplings(L: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    upper = np.triu(rng.normal(scale=scale, size=(L, L)), 1)
    return upper + upper.T


def nv_invariance_check(L: int, g1: np.ndarray, g2: np.ndarray) -> NVInvarianceReport:
    """
    Apply the flip-flop (H') and bright/dark (H'') pair Hamiltonians to the
    bright/dark Dicke state.

    Returns:
        ||H'|D>||, the Rayleigh quotient c of H'' and ||H''|D> - c|D>||
    """
    state = bright_dark_dicke(L)
    h1 = apply_pair_hamiltonian(state, FLIP_FLOP_PAIR, g1)
    h2 = apply_pair_hamiltonian(state, MIXED_PAIR, g2)
    eigenvalue = float(np.real(np.vdot(state.amplitudes, h2)))
    residual = float(np.linalg.norm(h2 - eigenvalue * state.amplitudes))
    report = NVInvarianceReport(L=L, h1_norm=float(np.linalg.norm(h1)),
                                h2_eigenvalue=eigenvalue, h2_residual=residual)
    logger.debug("NV invariance L=%d: %s", L, report)
    return report

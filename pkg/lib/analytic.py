"""
Closed-form large-L model: Bessel functions, F(u), the explicit readout
probability, and the sensitivity / detection-time formulas for Dicke,
separable and GHZ probes.

Units follow lib.geometry: lengths um, times s, densities cm^-3 at the
interface (converted to um^-3 internally), G in rad s^-1 um^3.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

from lib.constants import (CM3_TO_UM3, DEFAULT_G, F_MIN, GHZ_PREFACTOR, RHO_T2_PRODUCT,
                           RHO_VALIDITY_WINDOW, SHAPE_F_OPTIMUM, SHAPE_G_OPTIMUM, U_MIN)
from lib.errors import DomainError, LinearizationWarning, ValidityWindowWarning
from lib.geometry import Geometry, spin_count

logger = logging.getLogger(__name__)

BESSEL_MAX_ARGUMENT = 700.0
BESSEL_TERM_CUTOFF = 1e-17
LINEARIZATION_LIMIT = 0.1

STRATEGIES = ('dicke', 'separable', 'ghz-baseline')


@dataclass(frozen=True)
class ShapeOptima:
    """Optimal interaction time and probe shapes feeding the *_min formulas."""
    u_min: float = U_MIN
    F_min: float = F_MIN
    f_min: float = SHAPE_F_OPTIMUM[2]
    g_min: float = SHAPE_G_OPTIMUM[2]


@dataclass
class SensitivityParams:
    """Inputs shared by all sensitivity formulas."""
    G: float = DEFAULT_G        # rad s^-1 um^3
    s: float = 1.0              # target spin value
    T2: float = 1.98e-6         # s (T2*)
    rho: float = 1e18           # cm^-3
    T: float = 1.0              # total measurement time, s
    geom: Optional[Geometry] = None
    u: float = U_MIN            # t = u T2 / sqrt(L)
    L: Optional[int] = None     # defaults to spin_count(geom, rho)
    N: Optional[float] = None   # defaults to T / t

    @classmethod
    def from_material_relation(cls, rho: float, z_min: float, **kwargs) -> 'SensitivityParams':
        """Parameters with T2* tied to rho through rho T2* = 1.98e12 cm^-3 s."""
        geom = kwargs.pop('geom', None) or Geometry(r_max=z_min, z_min=z_min, z_max=2 * z_min)
        return cls(rho=rho, T2=T2_from_rho(rho), geom=geom, **kwargs)

    @property
    def z_min(self) -> float:
        if self.geom is None:
            raise DomainError("sensitivity parameters need a geometry for z_min")
        return self.geom.z_min

    @property
    def rho_um(self) -> float:
        if self.rho <= 0:
            raise DomainError(f"density must be positive, got {self.rho}")
        return self.rho * CM3_TO_UM3

    @property
    def spin_total(self) -> int:
        if self.L is not None:
            return self.L
        if self.geom is None:
            raise DomainError("need either L or a geometry to count spins")
        return spin_count(self.geom, self.rho)

    @property
    def t(self) -> float:
        return self.u * self.T2 / math.sqrt(self.spin_total)

    @property
    def repetitions(self) -> float:
        return self.N if self.N is not None else self.T / self.t


@dataclass(frozen=True)
class StrategyResult:
    strategy: str
    delta_s_min: float
    T_s: float  # s


def bessel_I(alpha: int, x: float) -> float:
    """
    Modified Bessel function of the first kind I_alpha(x), alpha in {0, 1},
    summed as a power series until the term ratio drops below 1e-17.
    """
    if alpha not in (0, 1):
        raise DomainError(f"only I_0 and I_1 are supported, got alpha={alpha}")
    if x < 0:
        raise DomainError(f"bessel_I needs x >= 0, got {x}")
    if x > BESSEL_MAX_ARGUMENT:
        raise DomainError(f"bessel_I argument {x} exceeds overflow guard {BESSEL_MAX_ARGUMENT}")

    half = x / 2.0
    term = 1.0 if alpha == 0 else half
    total = term
    m = 0
    while term > BESSEL_TERM_CUTOFF * total:
        m += 1
        term *= half * half / (m * (m + alpha))
        total += term
    return total


def _bessel_pair(u: float) -> Tuple[float, float]:
    argument = u * u / 4.0
    return bessel_I(0, argument), bessel_I(1, argument)


def F(u: float) -> float:
    """
    Time factor of the Dicke-probe uncertainty; minimal (3.35) at u = 0.598, i.e. u^2 = 0.357.

    Args:
        u: Rescaled interaction time, t = u T2 / sqrt(L)

    Returns:
        2 sqrt(2 I0(I0+I1)(1 - e^{-u^2/2} I0(I0+I1)/2)) / (sqrt(u) e^{-u^2/4} (I0-I1)^2)
    """
    if u <= 0:
        raise DomainError(f"F(u) needs u > 0, got {u}")
    i0, i1 = _bessel_pair(u)
    diagonal = i0 * (i0 + i1)
    numerator = 2.0 * math.sqrt(2.0 * diagonal * (1.0 - math.exp(-u * u / 2.0) * diagonal / 2.0))
    denominator = math.sqrt(u) * math.exp(-u * u / 4.0) * (i0 - i1) ** 2
    return numerator / denominator


def p_asymptotic_terms(params: SensitivityParams, sum_omega: float) -> Tuple[float, float]:
    """(field-free term, linear signal term) of the large-L readout probability."""
    u = params.u
    L = params.spin_total
    i0, i1 = _bessel_pair(u)
    envelope = math.exp(-u * u / 2.0)
    diagonal = envelope / 2.0 * i0 * (i0 + i1)
    # signal: (T2 / 2 sqrt(L)) u e^{-u^2/2} (1/2)(I0 - I1)^2 sum_omega
    signal = params.T2 / (2.0 * math.sqrt(L)) * u * envelope * 0.5 * (i0 - i1) ** 2 * sum_omega
    return diagonal, signal


def p_asymptotic(params: SensitivityParams, sum_omega: float) -> float:
    """Large-L readout probability, linear in sum_omega (rad/s)."""
    breach = abs(sum_omega) * params.t
    if breach > LINEARIZATION_LIMIT:
        warnings.warn(
            f"|sum_omega| t = {breach:.3g} exceeds {LINEARIZATION_LIMIT}; linearized p is unreliable",
            LinearizationWarning, stacklevel=2,
        )
    diagonal, signal = p_asymptotic_terms(params, sum_omega)
    return diagonal + signal


def _check_window(rho: float):
    lo, hi = RHO_VALIDITY_WINDOW
    if not lo <= rho <= hi:
        warnings.warn(
            f"rho = {rho:.3g} cm^-3 is outside the rho-T2* validity window [{lo:g}, {hi:g}]",
            ValidityWindowWarning, stacklevel=3,
        )


def rho_T2_relation(T2: float) -> float:
    """Density (cm^-3) with rho T2* = 1.98e12 cm^-3 s."""
    if T2 <= 0:
        raise DomainError(f"T2* must be positive, got {T2}")
    rho = RHO_T2_PRODUCT / T2
    _check_window(rho)
    return rho


def T2_from_rho(rho: float) -> float:
    """Inverse of rho_T2_relation, in seconds."""
    if rho <= 0:
        raise DomainError(f"density must be positive, got {rho}")
    _check_window(rho)
    return RHO_T2_PRODUCT / rho


def _no_signal(sum_domega_ds: float) -> bool:
    if sum_domega_ds == 0:
        logger.warning("zero field sum; uncertainty is infinite")
        return True
    return False


def delta_s_dicke(params: SensitivityParams, sum_domega_ds: float) -> float:
    """F(u) / sqrt(T T2) * L^(1/4) / |sum d omega / ds|."""
    if _no_signal(sum_domega_ds):
        return math.inf
    signal = abs(sum_domega_ds)
    return F(params.u) / math.sqrt(params.T * params.T2) * params.spin_total ** 0.25 / signal


def delta_s_sep(params: SensitivityParams, sum_domega_ds: float) -> float:
    """Separable probes at the standard quantum limit: sqrt(2) e^(1/4) sqrt(L) / (sqrt(T T2) |sum|)."""
    if _no_signal(sum_domega_ds):
        return math.inf
    signal = abs(sum_domega_ds)
    return GHZ_PREFACTOR * math.sqrt(params.spin_total) / (math.sqrt(params.T * params.T2) * signal)


def delta_s_ghz(params: SensitivityParams, sum_domega_ds: float) -> float:
    """GHZ baseline: F(u) replaced by sqrt(2) e^(1/4)."""
    if _no_signal(sum_domega_ds):
        return math.inf
    signal = abs(sum_domega_ds)
    return GHZ_PREFACTOR / math.sqrt(params.T * params.T2) * params.spin_total ** 0.25 / signal


def _collective_prefactor(time_factor: float, shape_factor: float, params: SensitivityParams) -> float:
    # time_factor * shape / (4 G pi^(3/4)) * z^(3/4) / rho^(3/4)
    return (time_factor * shape_factor / (4.0 * params.G * math.pi ** 0.75)
            * params.z_min ** 0.75 / params.rho_um ** 0.75)


def delta_s_dicke_min(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> StrategyResult:
    """Dicke probe at the optimal interaction time and shape."""
    prefactor = _collective_prefactor(optima.F_min, optima.f_min, params)
    return StrategyResult('dicke', prefactor / math.sqrt(params.T * params.T2), Ts_dicke(params, optima))


def delta_s_ghz_min(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> StrategyResult:
    prefactor = _collective_prefactor(GHZ_PREFACTOR, optima.f_min, params)
    return StrategyResult('ghz-baseline', prefactor / math.sqrt(params.T * params.T2), Ts_ghz(params, optima))


def delta_s_sep_min(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> StrategyResult:
    """sqrt(2) e^(1/4) g_min / (4 G sqrt(pi) sqrt(T T2)) * z^(3/2) / sqrt(rho)."""
    value = (GHZ_PREFACTOR * optima.g_min / (4.0 * params.G * math.sqrt(math.pi) * math.sqrt(params.T * params.T2))
             * params.z_min ** 1.5 / math.sqrt(params.rho_um))
    return StrategyResult('separable', value, Ts_sep(params, optima))


def Ts_dicke(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> float:
    """(F_min f_min)^2 / (16 G^2 pi^(3/2)) * z^(3/2) / (T2 rho^(3/2))."""
    return ((optima.F_min * optima.f_min) ** 2 / (16.0 * params.G ** 2 * math.pi ** 1.5)
            * params.z_min ** 1.5 / (params.T2 * params.rho_um ** 1.5))


def Ts_ghz(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> float:
    return ((GHZ_PREFACTOR * optima.f_min) ** 2 / (16.0 * params.G ** 2 * math.pi ** 1.5)
            * params.z_min ** 1.5 / (params.T2 * params.rho_um ** 1.5))


def Ts_sep(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> float:
    """(sqrt(2) e^(1/4) g_min)^2 / (16 G^2 pi) * z^3 / (T2 rho)."""
    return ((GHZ_PREFACTOR * optima.g_min) ** 2 / (16.0 * params.G ** 2 * math.pi)
            * params.z_min ** 3 / (params.T2 * params.rho_um))


def strategy_results(params: SensitivityParams, optima: ShapeOptima = ShapeOptima()) -> dict:
    """All three strategies keyed by name."""
    results = (delta_s_dicke_min(params, optima), delta_s_sep_min(params, optima),
               delta_s_ghz_min(params, optima))
    return {result.strategy: result for result in results}

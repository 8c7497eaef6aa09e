"""
Dipolar field of the target spin and probe-spin lattices in a cylindrical shell.

The target sits at the origin; probe spins fill the column
0 <= r <= r_max, z_min <= z <= z_max (um).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import integrate

from lib.constants import CM3_TO_UM3, DEFAULT_G
from lib.errors import DomainError, EmptyLatticeError
from lib.output import read_csv, read_provenance, write_csv

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

LATTICE_COLUMNS = ['r_um', 'z_um', 'omega_over_s']
LATTICE_MODES = ('uniform-random', 'cubic-grid')


@dataclass(frozen=True)
class Geometry:
    """Columnar probe region."""
    r_max: float  # um
    z_min: float  # um
    z_max: float  # um

    def __post_init__(self):
        if not 0 < self.z_min < self.z_max:
            raise DomainError(f"need 0 < z_min < z_max, got z_min={self.z_min}, z_max={self.z_max}")
        if self.r_max <= 0:
            raise DomainError(f"r_max must be positive, got {self.r_max}")

    @classmethod
    def from_normalized(cls, r_tilde: float, z_tilde: float, z_min: float) -> 'Geometry':
        """Build from r~ = r_max/z_min and z~ = z_max/z_min."""
        return cls(r_max=r_tilde * z_min, z_min=z_min, z_max=z_tilde * z_min)

    @property
    def r_tilde(self) -> float:
        return self.r_max / self.z_min

    @property
    def z_tilde(self) -> float:
        return self.z_max / self.z_min

    @property
    def volume(self) -> float:
        # um^3
        return math.pi * self.r_max ** 2 * (self.z_max - self.z_min)


@dataclass(frozen=True)
class Couplings:
    """Dipolar constant G (rad s^-1 um^3) and target spin value s."""
    G: float = DEFAULT_G
    s: float = 1.0


@dataclass
class SpinLattice:
    """Probe positions and per-spin field per unit s."""
    positions: np.ndarray       # (L, 2) array of (r_um, z_um)
    omegas: np.ndarray          # omega_s(r_j, z_j) / s, rad/s
    density: float              # cm^-3
    couplings: Couplings = field(default_factory=Couplings)
    seed: Optional[int] = None

    @property
    def count(self) -> int:
        return int(len(self.omegas))

    def fields(self, s: float = 1.0) -> np.ndarray:
        """Per-spin omega_s values for target value s."""
        return s * self.omegas


def _density_um(rho_cm3: float) -> float:
    if rho_cm3 <= 0:
        raise DomainError(f"density must be positive, got {rho_cm3}")
    return rho_cm3 * CM3_TO_UM3


def omega_s(r: ArrayLike, z: ArrayLike, c: Couplings) -> ArrayLike:
    """
    Secular dipolar field of the target at cylindrical position (r, z).

    Args:
        r: Radial distance (um)
        z: Height above the target (um)
        c: Dipolar constant and target spin value

    Returns:
        2 G s (r^2 - 2 z^2) / (r^2 + z^2)^(5/2) in rad/s
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    dist2 = r ** 2 + z ** 2
    if np.any(dist2 == 0.0):
        raise DomainError("omega_s is singular at the target position (r, z) = (0, 0)")
    result = 2.0 * c.G * c.s * (r ** 2 - 2.0 * z ** 2) / dist2 ** 2.5
    return float(result) if result.ndim == 0 else result


def expected_spin_count(geom: Geometry, rho_cm3: float) -> float:
    return _density_um(rho_cm3) * geom.volume


def spin_count(geom: Geometry, rho_cm3: float) -> int:
    """L = round(rho pi r_max^2 (z_max - z_min)) with rho converted to um^-3."""
    return int(round(expected_spin_count(geom, rho_cm3)))


def _sample_uniform(rng: np.random.Generator, geom: Geometry, count: int,
                    min_spacing_um: float, max_attempts: int) -> np.ndarray:
    if min_spacing_um <= 0:
        # area-weighted radial inverse CDF
        r = geom.r_max * np.sqrt(rng.random(count))
        z = geom.z_min + (geom.z_max - geom.z_min) * rng.random(count)
        return np.column_stack([r, z])

    accepted = []
    cartesian = []
    attempts = 0
    while len(accepted) < count:
        attempts += 1
        if attempts > max_attempts:
            raise DomainError(
                f"could not place {count} spins with minimum spacing {min_spacing_um} um "
                f"after {max_attempts} attempts"
            )
        r = geom.r_max * math.sqrt(rng.random())
        phi = 2.0 * math.pi * rng.random()
        z = geom.z_min + (geom.z_max - geom.z_min) * rng.random()
        point = np.array([r * math.cos(phi), r * math.sin(phi), z])
        if cartesian and np.min(np.linalg.norm(np.array(cartesian) - point, axis=1)) < min_spacing_um:
            continue
        cartesian.append(point)
        accepted.append((r, z))
    return np.array(accepted)


def _sample_cubic(geom: Geometry, rho_um: float) -> np.ndarray:
    spacing = rho_um ** (-1.0 / 3.0)
    n_xy = int(math.floor(geom.r_max / spacing))
    xy = spacing * np.arange(-n_xy, n_xy + 1)
    z = geom.z_min + spacing * np.arange(0, int(math.floor((geom.z_max - geom.z_min) / spacing)) + 1)
    x, y, zz = np.meshgrid(xy, xy, z, indexing='ij')
    r = np.hypot(x, y).ravel()
    zz = zz.ravel()
    inside = r <= geom.r_max
    return np.column_stack([r[inside], zz[inside]])


def generate_lattice(geom: Geometry, rho_cm3: float, mode: str = 'uniform-random',
                     c: Optional[Couplings] = None, seed: int = 0,
                     min_spacing_um: float = 0.0, max_attempts: int = 1_000_000) -> SpinLattice:
    """
    Place probe spins inside the shell.

    Args:
        geom: Column geometry
        rho_cm3: Probe density (cm^-3)
        mode: 'uniform-random' (seeded) or 'cubic-grid' (spacing rho^-1/3, clipped)
        c: Couplings used for the stored omega values (s is factored out)
        seed: Seed for uniform-random mode
        min_spacing_um: Optional rejection distance between probes
        max_attempts: Rejection-sampling budget

    Returns:
        SpinLattice whose omegas are omega_s / s
    """
    c = c or Couplings()
    expected = expected_spin_count(geom, rho_cm3)
    if expected < 1:
        raise EmptyLatticeError(f"expected spin count {expected:.3g} < 1 for {geom} at rho={rho_cm3:g} cm^-3")

    if mode == 'uniform-random':
        rng = np.random.default_rng(seed)
        positions = _sample_uniform(rng, geom, int(round(expected)), min_spacing_um, max_attempts)
    elif mode == 'cubic-grid':
        positions = _sample_cubic(geom, _density_um(rho_cm3))
        if len(positions) == 0:
            raise EmptyLatticeError(f"cubic grid at rho={rho_cm3:g} cm^-3 leaves no site inside {geom}")
        seed = None
    else:
        raise DomainError(f"unknown lattice mode {mode!r}; expected one of {LATTICE_MODES}")

    unit = Couplings(G=c.G, s=1.0)
    omegas = np.atleast_1d(omega_s(positions[:, 0], positions[:, 1], unit))
    logger.debug("generated %d spins in %s mode (expected %.2f)", len(omegas), mode, expected)
    return SpinLattice(positions=positions, omegas=omegas, density=rho_cm3, couplings=c, seed=seed)


def sum_domega_ds(lat: SpinLattice) -> float:
    """Sum_j d omega_s(r_j, z_j) / ds, which is the sum of the stored omegas."""
    if lat.count == 0:
        raise EmptyLatticeError("sum over an empty lattice")
    return float(np.sum(lat.omegas))


def continuum_domega_ds(geom: Geometry, rho_cm3: float, c: Optional[Couplings] = None) -> float:
    """
    Continuum limit of |sum_j d omega_s / ds| over the shell:
    4 pi G rho |z_max/sqrt(r_max^2+z_max^2) - z_min/sqrt(r_max^2+z_min^2)|
    """
    c = c or Couplings()
    rho_um = _density_um(rho_cm3)
    upper = geom.z_max / math.hypot(geom.r_max, geom.z_max)
    lower = geom.z_min / math.hypot(geom.r_max, geom.z_min)
    return 4.0 * math.pi * c.G * rho_um * abs(upper - lower)


def quadrature_domega_ds(geom: Geometry, rho_cm3: float, c: Optional[Couplings] = None,
                         epsrel: float = 1e-10) -> float:
    """Adaptive quadrature of rho * 2 pi r * 2G (r^2-2z^2)/(r^2+z^2)^(5/2), absolute value."""
    c = c or Couplings()
    rho_um = _density_um(rho_cm3)

    def integrand(r, z):
        return 2.0 * math.pi * r * 2.0 * c.G * (r * r - 2.0 * z * z) / (r * r + z * z) ** 2.5

    value, _ = integrate.dblquad(integrand, geom.z_min, geom.z_max, 0.0, geom.r_max,
                                 epsabs=0.0, epsrel=epsrel)
    return abs(rho_um * value)


def _shape_denominator(r_tilde: float, z_tilde: float) -> float:
    if r_tilde <= 0:
        raise DomainError(f"r~ must be positive, got {r_tilde}")
    if z_tilde <= 1:
        raise DomainError(f"z~ must exceed 1, got {z_tilde}")
    return z_tilde / math.hypot(r_tilde, z_tilde) - 1.0 / math.hypot(r_tilde, 1.0)


def shape_f(r_tilde: float, z_tilde: float) -> float:
    """Dicke-probe shape factor [r~^2 (z~-1)]^(1/4) / (z~/sqrt(r~^2+z~^2) - 1/sqrt(r~^2+1))."""
    denominator = _shape_denominator(r_tilde, z_tilde)
    return (r_tilde ** 2 * (z_tilde - 1.0)) ** 0.25 / denominator


def shape_g(r_tilde: float, z_tilde: float) -> float:
    """Separable-probe shape factor, same as shape_f with exponent 1/2."""
    denominator = _shape_denominator(r_tilde, z_tilde)
    return (r_tilde ** 2 * (z_tilde - 1.0)) ** 0.5 / denominator


def save_lattice_csv(lat: SpinLattice, path: str, overwrite: bool = False) -> str:
    df = pd.DataFrame({
        'r_um': lat.positions[:, 0],
        'z_um': lat.positions[:, 1],
        'omega_over_s': lat.omegas,
    }, columns=LATTICE_COLUMNS)
    values = {'rho_cm3': lat.density, 'G': lat.couplings.G, 's': lat.couplings.s, 'count': lat.count}
    return write_csv(df, path, 'lattice', values, seed=lat.seed, overwrite=overwrite)


def load_lattice_csv(path: str) -> SpinLattice:
    header = read_provenance(path)
    df = read_csv(path)
    missing = [col for col in LATTICE_COLUMNS if col not in df.columns]
    if missing:
        raise DomainError(f"lattice file {path} lacks columns {missing}")
    seed = header.get('seed')
    return SpinLattice(
        positions=df[['r_um', 'z_um']].to_numpy(dtype=float),
        omegas=df['omega_over_s'].to_numpy(dtype=float),
        density=float(header.get('rho_cm3', 'nan')),
        couplings=Couplings(G=float(header.get('G', DEFAULT_G)), s=float(header.get('s', 1.0))),
        seed=int(seed) if seed not in (None, 'None') else None,
    )


def field_grid(r_values: np.ndarray, z_values: np.ndarray) -> Tuple[pd.DataFrame, int]:
    """
    Reduced field omega_s/(2 G s) = (r^2-2z^2)/(r^2+z^2)^(5/2) over a grid.

    Returns:
        (DataFrame with r_um, z_um, omega_reduced; number of skipped origin cells)
    """
    rows = []
    skipped = 0
    reduced = Couplings(G=0.5, s=1.0)
    for r in r_values:
        for z in z_values:
            if r == 0 and z == 0:
                skipped += 1
                logger.warning("field grid cell at the origin skipped")
                continue
            rows.append((float(r), float(z), omega_s(r, z, reduced)))
    return pd.DataFrame(rows, columns=['r_um', 'z_um', 'omega_reduced']), skipped

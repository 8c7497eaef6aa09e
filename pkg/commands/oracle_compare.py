"""
oracle-compare: exact readout probability against the large-L asymptotics
and the shell-sum closed forms, over a list of spin counts and times u.

For each L a probe column with the configured normalized shape is filled at
the density that gives exactly L spins; the lattice fields are then rescaled
so that sum(omega) * T2 equals sum_omega_T2, keeping the comparison inside
the linear-response regime.
"""

import logging
import math
from typing import List

import numpy as np
import pandas as pd

from commands.common import emit
from lib.analytic import SensitivityParams, delta_s_dicke, p_asymptotic_terms
from lib.config import OracleCompareConfig, RunConfig
from lib.constants import CM3_TO_UM3, EXACT_P_CAP
from lib.errors import CapacityError
from lib.evolution import DephasingChannel, delta_s_empirical, exact_p
from lib.geometry import Geometry, SpinLattice, generate_lattice
from lib.verifiers import closed_form_terms

logger = logging.getLogger(__name__)

ORACLE_COLUMNS = ['L', 'u', 't_s', 'lattice_seed', 'sum_omega_rad_s', 'exact_p', 'p_asymptotic',
                  'closed_form_p', 'discrepancy', 'closed_form_discrepancy', 'exact_p_zero_field',
                  'p_asymptotic_zero_field', 'zero_field_discrepancy']


def scaled_lattice(params: OracleCompareConfig, L: int, seed: int) -> SpinLattice:
    """Uniform-random lattice with exactly L spins and sum(omega) T2 = sum_omega_T2."""
    geom = Geometry.from_normalized(params.r_tilde, params.z_tilde, params.z_min)
    rho_cm3 = L / geom.volume / CM3_TO_UM3
    lat = generate_lattice(geom, rho_cm3, seed=seed)
    total = float(np.sum(lat.omegas))
    scale = params.sum_omega_T2 / (params.T2 * total)
    return SpinLattice(positions=lat.positions, omegas=lat.omegas * scale, density=lat.density,
                       couplings=lat.couplings, seed=lat.seed)


def compare_row(params: OracleCompareConfig, L: int, u: float, lat: SpinLattice) -> dict:
    t = u * params.T2 / math.sqrt(L)
    ch = DephasingChannel.from_lattice(lat, params.T2, t)
    sum_omega = float(np.sum(ch.fields))
    exact = exact_p(lat, ch).p
    zero_field = exact_p(None, ch.with_fields(np.zeros(L))).p

    model = SensitivityParams(T2=params.T2, u=u, L=L, T=params.T)
    diagonal, signal = p_asymptotic_terms(model, sum_omega)
    closed = closed_form_terms(L, t, params.T2, sum_omega).p
    row = {
        'L': L, 'u': u, 't_s': t, 'lattice_seed': lat.seed, 'sum_omega_rad_s': sum_omega,
        'exact_p': exact, 'p_asymptotic': diagonal + signal, 'closed_form_p': closed,
        'discrepancy': abs(exact - diagonal - signal), 'closed_form_discrepancy': abs(exact - closed),
        'exact_p_zero_field': zero_field, 'p_asymptotic_zero_field': diagonal,
        'zero_field_discrepancy': abs(zero_field - diagonal),
    }
    if params.with_delta_s:
        row['delta_s_empirical'] = delta_s_empirical(lat, ch, params.T)
        row['delta_s_model'] = delta_s_dicke(model, float(np.sum(lat.omegas)))
    return row


def build_oracle_compare(params: OracleCompareConfig) -> pd.DataFrame:
    too_large = [L for L in params.L_values if L > EXACT_P_CAP]
    if too_large:
        raise CapacityError(f"oracle-compare limited to L <= {EXACT_P_CAP}, got {too_large}")
    rows = []
    for L in params.L_values:
        lat = scaled_lattice(params, L, params.seed + L)
        for u in params.u_values:
            rows.append(compare_row(params, L, u, lat))
        logger.info("oracle-compare L=%d done", L)
    columns = ORACLE_COLUMNS + (['delta_s_empirical', 'delta_s_model'] if params.with_delta_s else [])
    return pd.DataFrame(rows, columns=columns)


def cmd_oracle_compare(config: RunConfig) -> List[str]:
    df = build_oracle_compare(config.params)
    return [emit(config, df, 'oracle_compare.csv', {'lattice_seed_rule': 'seed + L'})]

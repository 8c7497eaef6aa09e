"""
ts-map: detection time T_s over (rho, z_min) with T2* tied to rho.

Rows whose optimal Dicke probe would hold fewer than one spin are kept
but flagged in `sub_single_spin`; the L^(1/4) scaling has no meaning there.
"""

import logging
from typing import List, Tuple

import numpy as np
import pandas as pd

from commands.common import emit, ordered_map
from lib.analytic import SensitivityParams, ShapeOptima, Ts_dicke, Ts_ghz, Ts_sep
from lib.config import RunConfig, TsMapConfig
from lib.constants import SHAPE_F_OPTIMUM
from lib.geometry import Geometry, expected_spin_count
from lib.optimizer import published_optima

logger = logging.getLogger(__name__)

TS_COLUMNS = ['rho_cm3', 'z_min_um', 'T2_s', 'Ts_dicke_s', 'Ts_sep_s', 'Ts_ghz_s', 'dicke_speedup',
              'L_expected', 'sub_single_spin']


def _grid_point(point: Tuple[float, float], G: float, optima: ShapeOptima) -> tuple:
    rho, z_min = point
    params = SensitivityParams.from_material_relation(rho, z_min, G=G)
    ts_dicke = Ts_dicke(params, optima)
    ts_sep = Ts_sep(params, optima)
    probe = Geometry.from_normalized(SHAPE_F_OPTIMUM[0], SHAPE_F_OPTIMUM[1], z_min)
    L_expected = expected_spin_count(probe, rho)
    return (rho, z_min, params.T2, ts_dicke, ts_sep, Ts_ghz(params, optima), ts_sep / ts_dicke,
            L_expected, L_expected < 1.0)


def build_ts_map(params: TsMapConfig, optima: ShapeOptima = None) -> pd.DataFrame:
    if optima is None:
        optima = published_optima(params.tol, params.workers) if params.rerun_optimizer else ShapeOptima()
    rho_axis = np.geomspace(params.rho_lo, params.rho_hi, params.n_rho)
    z_axis = np.geomspace(params.z_min_lo, params.z_min_hi, params.n_z)
    grid = [(float(rho), float(z)) for rho in rho_axis for z in z_axis]
    rows = ordered_map(lambda point: _grid_point(point, params.G, optima), grid, params.workers)
    df = pd.DataFrame(rows, columns=TS_COLUMNS)
    flagged = int(df['sub_single_spin'].sum())
    if flagged:
        logger.warning("ts-map: %d of %d grid points hold fewer than one probe spin", flagged, len(df))
    logger.info("ts-map: %d grid points", len(df))
    return df


def cmd_ts_map(config: RunConfig) -> List[str]:
    params = config.params
    optima = published_optima(params.tol, params.workers) if params.rerun_optimizer else ShapeOptima()
    df = build_ts_map(params, optima)
    extra = {'u_min': optima.u_min, 'F_min': optima.F_min, 'f_min': optima.f_min, 'g_min': optima.g_min,
             'sub_single_spin_rows': int(df['sub_single_spin'].sum())}
    return [emit(config, df, 'ts_map.csv', extra)]

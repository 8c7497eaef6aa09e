"""
optimize: recover the optimal interaction time and the two probe shapes.
"""

import logging
from typing import List

import pandas as pd

from commands.common import emit
from lib.config import OptimizeConfig, RunConfig
from lib.constants import F_MIN, SHAPE_F_OPTIMUM, SHAPE_G_OPTIMUM, U_MIN
from lib.optimizer import optimize_F, optimize_shape_f, optimize_shape_g

logger = logging.getLogger(__name__)

OPTIMA_COLUMNS = ['quantity', 'x1', 'x2', 'value', 'published_x1', 'published_x2',
                  'published_value', 'evaluations', 'tolerance']


def build_optima(params: OptimizeConfig) -> pd.DataFrame:
    time_opt = optimize_F(params.tol)
    f_opt = optimize_shape_f(params.tol, params.workers, params.restarts)
    g_opt = optimize_shape_g(params.tol, params.workers, params.restarts)
    nan = float('nan')
    rows = [
        ('F(u)', time_opt.x, nan, time_opt.value, U_MIN, nan, F_MIN, time_opt.evaluations, params.tol),
        ('f(r,z)', f_opt.point[0], f_opt.point[1], f_opt.value, *SHAPE_F_OPTIMUM, f_opt.evaluations,
         params.tol),
        ('g(r,z)', g_opt.point[0], g_opt.point[1], g_opt.value, *SHAPE_G_OPTIMUM, g_opt.evaluations,
         params.tol),
    ]
    logger.info("optima: u=%.4f F=%.4f f=%.4f g=%.4f", time_opt.x, time_opt.value, f_opt.value, g_opt.value)
    return pd.DataFrame(rows, columns=OPTIMA_COLUMNS)


def cmd_optimize(config: RunConfig) -> List[str]:
    return [emit(config, build_optima(config.params), 'optima.csv')]

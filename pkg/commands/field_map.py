"""
field-map: reduced dipolar field omega_s / (2 G s) over an (r, z) grid.
"""

import logging
from typing import List, Tuple

import numpy as np
import pandas as pd

from commands.common import emit
from lib.config import FieldMapConfig, RunConfig
from lib.geometry import field_grid

logger = logging.getLogger(__name__)


def build_field_map(params: FieldMapConfig) -> Tuple[pd.DataFrame, int]:
    r_values = np.linspace(params.r_lo, params.r_hi, params.nr)
    z_values = np.linspace(params.z_lo, params.z_hi, params.nz)
    df, skipped = field_grid(r_values, z_values)
    if skipped:
        logger.warning("%d grid cell(s) at the target position skipped", skipped)
    return df, skipped


def cmd_field_map(config: RunConfig) -> List[str]:
    df, skipped = build_field_map(config.params)
    return [emit(config, df, 'field_map.csv', {'skipped_cells': skipped})]

"""
pulse-sim: preparation and readout fidelities of the spin-star protocol over
spin counts and hard-pulse ratios, plus the preparation pulse schedule.
"""

import logging
import warnings
from typing import List, Tuple

import pandas as pd

from commands.common import emit
from lib.config import PulseSimConfig, RunConfig
from lib.errors import RegimeViolationError, RegimeWarning
from lib.spin_star import (StarParams, build_u_read, preparation_schedule, prepare_dicke,
                           soft_pulse_report)

logger = logging.getLogger(__name__)

PULSE_COLUMNS = ['L', 'hard_ratio', 'selectivity', 'ideal_prep_fidelity', 'prep_fidelity',
                 'ideal_readout_fidelity', 'readout_fidelity', 'soft_duration_s', 'soft_fidelity',
                 'leak_down', 'leak_up', 'regime_violation']


def star_params(params: PulseSimConfig, L: int, ratio: float) -> StarParams:
    return StarParams.dispersive_defaults(L, detuning_factor=params.detuning_factor,
                                          selectivity=params.selectivity, lam=params.lam,
                                          omega_P=params.omega_P, omega_A=params.omega_P,
                                          lambda_d=ratio * params.lam)


def simulate_row(params: PulseSimConfig, L: int, ratio: float, strict: bool) -> dict:
    """One grid point; regime violations land in the row unless strict."""
    p = star_params(params, L, ratio)
    nan = float('nan')
    row = dict.fromkeys(PULSE_COLUMNS, nan)
    row.update({'L': L, 'hard_ratio': ratio, 'selectivity': params.selectivity, 'regime_violation': ''})
    problems = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', RegimeWarning)
        try:
            row['ideal_prep_fidelity'] = prepare_dicke(L, p, ideal_pulses=True)[1]
            row['ideal_readout_fidelity'] = build_u_read(L, p, ideal=True).fidelity
            row['prep_fidelity'] = prepare_dicke(L, p, ideal_pulses=False, strict=strict,
                                                 compensate_pulse_time=params.compensate_pulse_time)[1]
            report = build_u_read(L, p, ideal=False, strict=strict)
            row['readout_fidelity'] = report.fidelity
            soft = soft_pulse_report(L, p, strict=strict)
            row.update({'soft_duration_s': soft['duration_s'], 'soft_fidelity': soft['fidelity'],
                        'leak_down': soft['leak_down'], 'leak_up': soft['leak_up']})
        except RegimeViolationError as exc:
            if strict:
                raise
            problems.append(str(exc))
    problems.extend(str(w.message) for w in caught if issubclass(w.category, RegimeWarning))
    row['regime_violation'] = '; '.join(dict.fromkeys(problems))
    if problems:
        logger.warning("L=%d ratio=%g: %s", L, ratio, row['regime_violation'])
    return row


def build_pulse_sim(params: PulseSimConfig, strict: bool = False) -> Tuple[pd.DataFrame, dict]:
    rows = []
    schedules = {}
    for L in params.L_values:
        for ratio in params.hard_ratios:
            rows.append(simulate_row(params, L, ratio, strict))
        p = star_params(params, L, max(params.hard_ratios))
        schedules[L] = preparation_schedule(L, p, ideal_pulses=False).to_frame()
        logger.info("pulse-sim L=%d done", L)
    return pd.DataFrame(rows, columns=PULSE_COLUMNS), schedules


def cmd_pulse_sim(config: RunConfig) -> List[str]:
    df, schedules = build_pulse_sim(config.params, strict=config.strict)
    paths = [emit(config, df, 'pulse_sim.csv')]
    for L, schedule in schedules.items():
        paths.append(emit(config, schedule, f'schedule_L{L}.csv', {'schedule_L': L}))
    return paths

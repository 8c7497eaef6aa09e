"""
Run configuration: per-command parameter dataclasses, a flat key = value
config file, and command-line overrides.

Precedence: dataclass defaults < config file < command-line flags.
"""

import configparser
import dataclasses
import logging
import os
import typing
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from lib.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = 'runs'
_SECTION = 'run'


@dataclass
class CommonConfig:
    seed: int = 0
    workers: int = 1
    log_level: str = 'WARNING'


@dataclass
class FieldMapConfig(CommonConfig):
    r_lo: float = 0.0          # um
    r_hi: float = 2.0          # um
    nr: int = 41
    z_lo: float = -2.0         # um
    z_hi: float = 2.0          # um
    nz: int = 81


@dataclass
class OptimizeConfig(CommonConfig):
    tol: float = 1e-6
    restarts: int = 4


@dataclass
class TsMapConfig(CommonConfig):
    rho_lo: float = 1e16       # cm^-3
    rho_hi: float = 1e19       # cm^-3
    n_rho: int = 31
    z_min_lo: float = 0.005    # um
    z_min_hi: float = 0.1      # um
    n_z: int = 20
    G: float = 8.1746e-2       # rad s^-1 um^3
    rerun_optimizer: bool = True
    tol: float = 1e-6


@dataclass
class OracleCompareConfig(CommonConfig):
    L_values: List[int] = field(default_factory=lambda: [2, 4, 6, 8, 10, 12])
    u_values: List[float] = field(default_factory=lambda: [0.001, 0.1, 0.2, 0.357, 0.5, 0.598, 0.75, 1.0])
    T2: float = 1e-6           # s
    z_min: float = 0.02        # um
    r_tilde: float = 1.87
    z_tilde: float = 4.30
    sum_omega_T2: float = 0.05 # fields rescaled so that sum(omega) * T2 equals this
    with_delta_s: bool = False
    T: float = 1.0             # s, total time for the delta_s column


@dataclass
class PulseSimConfig(CommonConfig):
    L_values: List[int] = field(default_factory=lambda: [2, 4, 6, 8])
    hard_ratios: List[float] = field(default_factory=lambda: [10.0, 30.0, 100.0])
    selectivity: float = 0.02
    detuning_factor: float = 60.0
    lam: float = 6.283185307e6         # rad/s
    omega_P: float = 1.8849555922e10   # rad/s
    compensate_pulse_time: bool = False


@dataclass
class VerifyConfig(CommonConfig):
    L_max: int = 12
    qutrit_L: int = 4
    draws: int = 100
    closed_form_L_max: int = 8


COMMAND_CONFIGS = {
    'field-map': FieldMapConfig,
    'optimize': OptimizeConfig,
    'ts-map': TsMapConfig,
    'oracle-compare': OracleCompareConfig,
    'pulse-sim': PulseSimConfig,
    'verify': VerifyConfig,
}


@dataclass
class RunConfig:
    """Resolved configuration for one command invocation."""
    command: str
    params: Any
    out_dir: str
    strict: bool = False
    source_file: Optional[str] = None

    @property
    def seed(self) -> int:
        return self.params.seed

    def values(self) -> Dict[str, Any]:
        return dataclasses.asdict(self.params)


def _coerce(name: str, raw: Any, annotation) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    origin = typing.get_origin(annotation)
    try:
        if origin in (list, List):
            (item_type,) = typing.get_args(annotation)
            return [item_type(float(item)) if item_type is int else item_type(item)
                    for item in text.split(',') if item.strip()]
        if annotation is bool:
            lowered = text.lower()
            if lowered in ('1', 'true', 'yes', 'on'):
                return True
            if lowered in ('0', 'false', 'no', 'off'):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if annotation is int:
            value = float(text)
            if value != int(value):
                raise ValueError(f"not an integer: {text!r}")
            return int(value)
        if annotation is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from exc


def load_config_file(path: str) -> Dict[str, str]:
    """Read a flat UTF-8 'key = value' file with '#' comments."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(comment_prefixes=('#',), inline_comment_prefixes=('#',),
                                       interpolation=None)
    parser.optionxform = str
    try:
        with open(path, encoding='utf-8') as fh:
            parser.read_string(f"[{_SECTION}]\n" + fh.read(), source=path)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    return dict(parser.items(_SECTION))


def validate_run_config(command: str, values: Dict[str, Any]) -> Dict[str, Any]:
    """
    Check keys and basic ranges before a run.

    Returns:
        {'valid': bool, 'error': str}
    """
    if command not in COMMAND_CONFIGS:
        return {'valid': False, 'error': f"unknown command {command!r}"}
    known = {f.name for f in dataclasses.fields(COMMAND_CONFIGS[command])}
    unknown = sorted(set(values) - known)
    if unknown:
        return {'valid': False, 'error': f"unknown keys for {command}: {', '.join(unknown)}"}
    for key, value in values.items():
        if key.startswith('n') and isinstance(value, int) and value < 1:
            return {'valid': False, 'error': f"{key} must be at least 1"}
        if key in ('tol', 'T2', 'T', 'lam', 'G') and isinstance(value, (int, float)) and value <= 0:
            return {'valid': False, 'error': f"{key} must be positive"}
    workers = values.get('workers', 1)
    if isinstance(workers, int) and workers < 1:
        return {'valid': False, 'error': "workers must be at least 1"}
    return {'valid': True, 'error': ''}


def resolve_config(command: str, config_path: Optional[str] = None,
                   overrides: Optional[Dict[str, Any]] = None, out_dir: Optional[str] = None,
                   strict: bool = False) -> RunConfig:
    """
    Merge defaults, an optional config file and flag overrides.

    Args:
        command: Subcommand name
        config_path: Optional flat config file
        overrides: Values from command-line flags (None entries are ignored)
        out_dir: Output directory; a timestamped one under DICKE_SENSE_OUT otherwise
        strict: Treat regime warnings as errors

    Returns:
        RunConfig with typed parameters
    """
    if command not in COMMAND_CONFIGS:
        raise ConfigError(f"unknown command {command!r}")
    config_cls = COMMAND_CONFIGS[command]
    hints = typing.get_type_hints(config_cls)

    merged: Dict[str, Any] = {}
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update({key: value for key, value in (overrides or {}).items() if value is not None})

    check = validate_run_config(command, {key: None for key in merged})
    if not check['valid']:
        raise ConfigError(check['error'])

    typed = {key: _coerce(key, value, hints[key]) for key, value in merged.items()}
    check = validate_run_config(command, typed)
    if not check['valid']:
        raise ConfigError(check['error'])

    params = config_cls(**typed)
    if out_dir is None:
        stamp = datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%SZ')
        out_dir = os.path.join(os.getenv('DICKE_SENSE_OUT', DEFAULT_OUT_DIR), f"{command}_{stamp}")
    logger.debug("resolved %s config: %s", command, params)
    return RunConfig(command=command, params=params, out_dir=out_dir, strict=strict, source_file=config_path)

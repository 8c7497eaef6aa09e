"""
CSV emission with '#'-prefixed provenance headers.
"""

import logging
import os
from typing import Any, Dict, Optional

import pandas as pd

from lib import __version__
from lib.errors import ConfigError

logger = logging.getLogger(__name__)

TOOL_NAME = "dicke-sense"


def provenance_lines(command: str, values: Dict[str, Any], seed: Optional[int] = None) -> list:
    """Header lines: tool version, command, seed, then one line per config entry."""
    lines = [f"# tool = {TOOL_NAME} {__version__}", f"# command = {command}"]
    if seed is not None:
        lines.append(f"# seed = {seed}")
    for key in sorted(values):
        value = values[key]
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {key} = {value}")
    return lines


def write_csv(df: pd.DataFrame, path: str, command: str, values: Dict[str, Any],
              seed: Optional[int] = None, overwrite: bool = False) -> str:
    """
    Write a DataFrame as CSV preceded by provenance comment lines.

    Args:
        df: Table to write, columns in output order
        path: Destination file
        command: Name of the producing command
        values: Resolved configuration echoed into the header
        seed: Random seed, if the command uses one
        overwrite: Allow replacing an existing file

    Returns:
        The path written
    """
    if os.path.exists(path) and not overwrite:
        raise ConfigError(f"refusing to overwrite existing output {path}")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, 'w', encoding='utf-8', newline='') as fh:
        for line in provenance_lines(command, values, seed):
            fh.write(line + "\n")
        df.to_csv(fh, index=False, float_format='%.12g')
    logger.info("wrote %d rows to %s", len(df), path)
    return path


def read_provenance(path: str) -> Dict[str, str]:
    """Parse the '# key = value' header of a file written by write_csv."""
    header = {}
    with open(path, encoding='utf-8') as fh:
        for line in fh:
            if not line.startswith('#'):
                break
            key, sep, value = line[1:].partition('=')
            if sep:
                header[key.strip()] = value.strip()
    return header


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')

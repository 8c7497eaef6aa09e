"""
Helpers shared by the subcommands: output paths, provenance values and the
deterministic worker pool used by grid sweeps.
"""

import os
import subprocess
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

import pandas as pd

from lib.config import RunConfig
from lib.output import write_csv

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _read_git_head_from_dotgit(repo_root: str) -> Optional[str]:
    head_path = os.path.join(repo_root, '.git', 'HEAD')
    try:
        if not os.path.exists(head_path):
            return None
        with open(head_path, 'r', encoding='utf-8') as fh:
            content = fh.read().strip()
        # HEAD may hold "ref: refs/heads/main" or a bare hash
        if not content.startswith('ref:'):
            return content
        ref_file = os.path.join(repo_root, '.git', *content.split('ref:')[1].strip().split('/'))
        if os.path.exists(ref_file):
            with open(ref_file, 'r', encoding='utf-8') as rf:
                return rf.read().strip()
    except OSError:
        return None
    return None


def get_git_commit() -> Optional[str]:
    """Current commit via the git CLI, falling back to .git/HEAD."""
    try:
        return subprocess.check_output(["git", "rev-parse", "HEAD"], cwd=REPO_ROOT,
                                       stderr=subprocess.DEVNULL).decode().strip()
    except (FileNotFoundError, subprocess.CalledProcessError, OSError):
        return _read_git_head_from_dotgit(REPO_ROOT)


def provenance_values(config: RunConfig) -> dict:
    values = config.values()
    values['strict'] = config.strict
    values['git_commit'] = get_git_commit() or 'unavailable'
    if config.source_file:
        values['config_file'] = config.source_file
    return values


def emit(config: RunConfig, df: pd.DataFrame, filename: str, extra: Optional[dict] = None) -> str:
    """Write one table into the run directory with the config echoed in its header."""
    values = provenance_values(config)
    values.update(extra or {})
    return write_csv(df, os.path.join(config.out_dir, filename), config.command, values, seed=config.seed)


def ordered_map(func: Callable, items: Iterable, workers: int) -> List:
    """Map over a worker pool; results come back in input order."""
    items = list(items)
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

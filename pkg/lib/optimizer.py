"""
Derivative-free minimization of F(u) and the probe shape factors.

1D: bounded Brent search (golden section with parabolic refinement).
2D: Nelder-Mead from the best points of a coarse log-spaced start grid,
with r~ > 0 and z~ > 1 enforced through a softplus reparameterization.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from lib.analytic import F, ShapeOptima
from lib.errors import DomainError, OptimizationError
from lib.geometry import shape_f, shape_g

logger = logging.getLogger(__name__)

DEFAULT_PARAM_TOL = 1e-6
DEFAULT_VALUE_TOL = 1e-9
F_SEARCH_INTERVAL = (0.01, 5.0)
SHAPE_GRID_R = (0.1, 20.0)
SHAPE_GRID_Z = (1.01, 50.0)
SHAPE_GRID_SIZE = 16


@dataclass(frozen=True)
class Optimum1D:
    x: float
    value: float
    evaluations: int
    bracket: Tuple[float, float]


@dataclass(frozen=True)
class Optimum2D:
    point: Tuple[float, float]
    value: float
    simplex_spread: float
    evaluations: int = 0
    restarts: int = 1


class _CountedObjective:
    """Wraps an objective, counting calls and rejecting non-finite values."""

    def __init__(self, objective: Callable, transform: Optional[Callable] = None):
        self.objective = objective
        self.transform = transform
        self.evaluations = 0

    def __call__(self, x):
        self.evaluations += 1
        args = self.transform(x) if self.transform else x
        value = self.objective(*args) if isinstance(args, (tuple, list, np.ndarray)) else self.objective(args)
        value = float(value)
        if not math.isfinite(value):
            raise OptimizationError(f"objective returned non-finite value {value} at {args}")
        return value


def minimize_scalar(objective: Callable[[float], float], lo: float, hi: float,
                    tol: float = DEFAULT_PARAM_TOL) -> Optimum1D:
    """
    Minimize a unimodal function on [lo, hi].

    Args:
        objective: Function of one real variable
        lo: Lower end of the search interval
        hi: Upper end of the search interval
        tol: Absolute tolerance on the minimizer

    Returns:
        Optimum1D; endpoints are compared so value <= min(f(lo), f(hi))
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    counted = _CountedObjective(objective)
    result = optimize.minimize_scalar(counted, bounds=(lo, hi), method='bounded',
                                      options={'xatol': tol, 'maxiter': 10_000})
    best_x, best_value = float(result.x), float(result.fun)
    for edge in (lo, hi):
        edge_value = counted(edge)
        if edge_value < best_value:
            best_x, best_value = edge, edge_value
    logger.debug("minimize_scalar on [%g, %g]: x=%.9g value=%.12g after %d evaluations",
                 lo, hi, best_x, best_value, counted.evaluations)
    return Optimum1D(x=best_x, value=best_value, evaluations=counted.evaluations, bracket=(lo, hi))


def multistart_scalar(objective: Callable[[float], float], lo: float, hi: float,
                      tol: float = DEFAULT_PARAM_TOL, pieces: int = 8) -> Optimum1D:
    """minimize_scalar on equal sub-intervals, keeping the best."""
    edges = np.linspace(lo, hi, pieces + 1)
    optima = [minimize_scalar(objective, a, b, tol) for a, b in zip(edges[:-1], edges[1:])]
    best = min(optima, key=lambda opt: opt.value)
    total = sum(opt.evaluations for opt in optima)
    return Optimum1D(x=best.x, value=best.value, evaluations=total, bracket=(lo, hi))


def softplus(a):
    return np.logaddexp(0.0, a)


def softplus_inverse(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("softplus inverse needs positive arguments")
    return np.where(x > 30.0, x, np.log(np.expm1(np.minimum(x, 30.0))))


def shape_to_point(params: Sequence[float]) -> Tuple[float, float]:
    """Unconstrained (a, b) to (r~, z~) = (softplus(a), 1 + softplus(b))."""
    return float(softplus(params[0])), 1.0 + float(softplus(params[1]))


def point_to_shape(point: Sequence[float]) -> np.ndarray:
    return np.array([softplus_inverse(point[0]), softplus_inverse(point[1] - 1.0)], dtype=float)


def shape_start_grid(size: int = SHAPE_GRID_SIZE) -> List[Tuple[float, float]]:
    r_values = np.geomspace(*SHAPE_GRID_R, size)
    z_values = np.geomspace(*SHAPE_GRID_Z, size)
    return [(float(r), float(z)) for r in r_values for z in z_values]


def _run_simplex(objective: Callable, start: Tuple[float, float], tol: float,
                 domain: str) -> Optional[Tuple[Tuple[float, float], float, float, int]]:
    if domain == 'shape':
        counted = _CountedObjective(objective, transform=shape_to_point)
        x0 = point_to_shape(start)
        to_point = shape_to_point
    else:
        counted = _CountedObjective(objective, transform=lambda p: (float(p[0]), float(p[1])))
        x0 = np.asarray(start, dtype=float)
        to_point = lambda p: (float(p[0]), float(p[1]))

    try:
        result = optimize.minimize(counted, x0, method='Nelder-Mead',
                                   options={'xatol': tol, 'fatol': DEFAULT_VALUE_TOL,
                                            'maxiter': 20_000, 'maxfev': 40_000})
    except OptimizationError as exc:
        logger.warning("simplex from %s diverged: %s", start, exc)
        return None

    vertices = np.array([to_point(v) for v in result.final_simplex[0]])
    best = np.array(to_point(result.x))
    spread = float(np.max(np.abs(vertices - best)))
    return to_point(result.x), float(result.fun), spread, counted.evaluations


def minimize_2d(objective: Callable[[float, float], float], start: Tuple[float, float],
                tol: float = DEFAULT_PARAM_TOL, restarts: int = 4,
                grid: Optional[Iterable[Tuple[float, float]]] = None,
                domain: str = 'free', workers: int = 1) -> Optimum2D:
    """
    Downhill simplex with a coarse-grid multistart.

    Args:
        objective: Function of two reals
        start: Always used as one starting point
        tol: Parameter tolerance of each simplex run
        restarts: Number of best grid points to refine in addition to start
        grid: Candidate start points; defaults to the shape grid when domain='shape'
        domain: 'shape' maps (r~ > 0, z~ > 1) through softplus, 'free' is unconstrained
        workers: Thread pool size for the independent restarts

    Returns:
        Best Optimum2D over all restarts
    """
    if domain not in ('free', 'shape'):
        raise DomainError(f"unknown domain {domain!r}")
    if grid is None and domain == 'shape':
        grid = shape_start_grid()

    starts = [tuple(start)]
    seed_values = []
    if grid is not None:
        for point in grid:
            value = objective(*point)
            if math.isfinite(value):
                seed_values.append((value, tuple(point)))
        seed_values.sort()
        starts += [point for _, point in seed_values[:restarts] if point != tuple(start)]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(lambda s: _run_simplex(objective, s, tol, domain), starts))

    finished = [outcome for outcome in outcomes if outcome is not None and math.isfinite(outcome[1])]
    if not finished:
        raise OptimizationError(f"all {len(starts)} simplex restarts diverged")
    point, value, spread, _ = min(finished, key=lambda outcome: outcome[1])
    evaluations = sum(outcome[3] for outcome in finished) + len(seed_values)
    logger.info("minimize_2d: %d restarts, best %s value %.9g", len(starts), point, value)
    return Optimum2D(point=point, value=value, simplex_spread=spread,
                     evaluations=evaluations, restarts=len(starts))


def optimize_F(tol: float = DEFAULT_PARAM_TOL) -> Optimum1D:
    return minimize_scalar(F, *F_SEARCH_INTERVAL, tol=tol)


def optimize_shape_f(tol: float = DEFAULT_PARAM_TOL, workers: int = 1, restarts: int = 4) -> Optimum2D:
    return minimize_2d(shape_f, (1.5, 4.0), tol=tol, restarts=restarts, domain='shape', workers=workers)


def optimize_shape_g(tol: float = DEFAULT_PARAM_TOL, workers: int = 1, restarts: int = 4) -> Optimum2D:
    return minimize_2d(shape_g, (1.0, 2.0), tol=tol, restarts=restarts, domain='shape', workers=workers)


def published_optima(tol: float = DEFAULT_PARAM_TOL, workers: int = 1) -> ShapeOptima:
    """Run all three searches and bundle them for the *_min formulas."""
    time_opt = optimize_F(tol)
    f_opt = optimize_shape_f(tol, workers)
    g_opt = optimize_shape_g(tol, workers)
    return ShapeOptima(u_min=time_opt.x, F_min=time_opt.value, f_min=f_opt.value, g_min=g_opt.value)

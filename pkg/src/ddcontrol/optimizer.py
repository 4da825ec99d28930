"""Exhaustive gain search for expected terminal total return.

The objective ``J(gamma) = E[V(N) / V(0)]`` is generally non-concave in the
gain, so it is evaluated on a dense grid over the feasible interval rather
than climbed.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .drawdown import DRIFT_TOL, DrawdownSpec, GammaInterval
from .kernels import modulation_batch
from .market_data import RatePath, SupportEstimate

DEFAULT_RESOLUTION = 2001
DEFAULT_TIE_TOLERANCE = 1e-4
_CHUNK_CELLS = 2_000_000


class OptimizationError(ValueError):
    pass


@dataclass(frozen=True)
class GammaGrid:
    interval: GammaInterval
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if self.resolution < 3:
            raise OptimizationError("grid resolution must be at least 3")

    def points(self) -> np.ndarray:
        """Evenly spaced points plus 0, sorted.

        Points are ``lo + (hi - lo) * (i / (n - 1))``, so a grid with
        resolution ``2n - 1`` contains every point of the ``n`` grid bit for bit.
        """
        n = self.resolution
        lo, hi = self.interval.lo, self.interval.hi
        t = np.arange(n, dtype=np.float64) / float(n - 1)
        pts = lo + (hi - lo) * t
        pts[-1] = hi
        return np.unique(np.append(pts, 0.0))


@dataclass(frozen=True)
class ObjectiveCurve:
    gammas: np.ndarray
    values: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.gammas.tolist(), self.values.tolist()))

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gamma", "J"])
            for g, j in zip(self.gammas, self.values):
                w.writerow([repr(float(g)), repr(float(j))])


@dataclass(frozen=True)
class OptimizationResult:
    gamma_star: float
    j_star: float
    curve: ObjectiveCurve
    tie_tolerance: float

    def to_dict(self) -> dict:
        return {
            "gamma_star": self.gamma_star,
            "j_star": self.j_star,
            "tie_tolerance": self.tie_tolerance,
            "grid_points": int(len(self.curve.gammas)),
        }


def _as_paths(paths) -> np.ndarray:
    if hasattr(paths, "returns"):
        paths = paths.returns
    if isinstance(paths, (list, tuple)):
        paths = [getattr(p, "returns", p) for p in paths]
    arr = np.asarray(paths, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise OptimizationError("need at least one nonempty return path")
    return arr


def _as_rates(rates, n: int) -> np.ndarray:
    r = np.asarray(getattr(rates, "rates", rates), dtype=np.float64)
    if r.ndim == 0:
        return np.full(n, float(r))
    if r.shape != (n,):
        raise OptimizationError(f"rate path length {r.shape} does not match horizon {n}")
    return r


def _simulate(gammas, paths, rates, spec, cash_financing, support, cost_rate):
    clip = support is not None
    x_min = support.x_min if clip else -1.0
    x_max = support.x_max if clip else 1.0
    return modulation_batch(gammas, paths, rates, spec.d_max, cash_financing, cost_rate,
                            x_min, x_max, clip)


def _check_inputs(paths, rates, support, interval, gammas):
    if support is not None:
        if not support.contains(paths):
            raise OptimizationError(
                f"return path outside support [{support.x_min}, {support.x_max}]"
            )
        RatePath(rates).check_against(support)
    if interval is not None:
        g = np.asarray(gammas)
        if np.any(g < interval.lo) or np.any(g > interval.hi):
            raise OptimizationError("gain outside the feasible interval")


def evaluate_objective(
    gamma: float,
    paths,
    rates,
    spec: DrawdownSpec,
    cash_financing: bool = True,
    *,
    support: SupportEstimate | None = None,
    interval: GammaInterval | None = None,
    cost_rate: float = 0.0,
) -> float:
    """Mean terminal total return of the no-restart policy over ``paths``."""
    x = _as_paths(paths)
    r = _as_rates(rates, x.shape[1])
    _check_inputs(x, r, support, interval, [gamma])
    ratio, dstar = _simulate(np.full(x.shape[0], float(gamma)), x, r, spec,
                             cash_financing, support, cost_rate)
    if np.any(~(ratio > 0)):
        raise OptimizationError(f"account value hit zero at gain {gamma}")
    return float(np.mean(ratio))


def objective_curve(
    gammas,
    paths,
    rates,
    spec: DrawdownSpec,
    cash_financing: bool = True,
    *,
    support: SupportEstimate | None = None,
    cost_rate: float = 0.0,
    return_drawdowns: bool = False,
):
    x = _as_paths(paths)
    r = _as_rates(rates, x.shape[1])
    gammas = np.asarray(gammas, dtype=np.float64)
    values = np.empty(len(gammas))
    worst = np.empty(len(gammas))
    n_paths, n = x.shape
    # stack several gains per kernel call; keeps the numpy backend vectorized
    # when there are few paths
    step = max(1, _CHUNK_CELLS // (n_paths * n))
    for start in range(0, len(gammas), step):
        g = gammas[start:start + step]
        c = len(g)
        ratio, dstar = _simulate(np.repeat(g, n_paths), np.tile(x, (c, 1)), r, spec,
                                 cash_financing, support, cost_rate)
        ratio = ratio.reshape(c, n_paths)
        bad = np.any(~(ratio > 0), axis=1)
        if np.any(bad):
            raise OptimizationError(f"account value hit zero at gain {g[np.argmax(bad)]}")
        values[start:start + c] = ratio.mean(axis=1)
        worst[start:start + c] = dstar.reshape(c, n_paths).max(axis=1)
    curve = ObjectiveCurve(gammas, values)
    return (curve, worst) if return_drawdowns else curve


def grid_search(
    grid: GammaGrid,
    paths,
    rates,
    spec: DrawdownSpec,
    cash_financing: bool = True,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    *,
    support: SupportEstimate | None = None,
    cost_rate: float = 0.0,
) -> OptimizationResult:
    """Evaluate every grid gain; pick the smallest one within tolerance of the best.

    Taking the smallest near-optimal gain is the risk-averse choice when the
    objective is flat over a range, as it is once the cash clamp saturates.
    """
    if tie_tolerance < 0:
        raise OptimizationError("tie tolerance must be nonnegative")
    x = _as_paths(paths)
    r = _as_rates(rates, x.shape[1])
    gammas = grid.points()
    _check_inputs(x, r, support, None, gammas)
    curve, worst = objective_curve(gammas, x, r, spec, cash_financing, support=support,
                                   cost_rate=cost_rate, return_drawdowns=True)
    if cost_rate == 0.0 and np.any(worst > spec.d_max + DRIFT_TOL) and support is not None:
        raise OptimizationError("drawdown limit breached inside the feasible set")
    j_star = float(curve.values.max())
    candidates = np.nonzero(curve.values >= j_star * (1.0 - tie_tolerance))[0]
    gamma_star = float(gammas[candidates[0]])
    return OptimizationResult(gamma_star, j_star, curve, tie_tolerance)


def fractionalize(gamma_star: float, alpha: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise OptimizationError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha * gamma_star

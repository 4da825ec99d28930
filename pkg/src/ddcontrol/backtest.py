"""Out-of-sample simulation of buy-and-hold and modulation policies."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .market_data import RatePath, ReturnSeries, SupportEstimate
from .policy import PolicyConfig

DEFAULT_V0 = 1.0
DEFAULT_DAILY_RATE = 0.01 / 365


class BacktestError(RuntimeError):
    pass


@dataclass(frozen=True)
class CostModel:
    rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise BacktestError(f"cost rate must lie in [0, 1), got {self.rate}")


@dataclass(frozen=True)
class BuyAndHold:
    """Baseline holding the whole account in the risky asset (K = 1)."""


@dataclass
class Trajectory:
    v: np.ndarray
    u: np.ndarray
    k_gain: np.ndarray
    d: np.ndarray
    episode_d: np.ndarray
    restarted: np.ndarray
    costs_paid: np.ndarray
    gain_multiplier: np.ndarray
    dates: np.ndarray | None = None
    prices: np.ndarray | None = None

    @property
    def restarts(self) -> list[int]:
        return np.flatnonzero(self.restarted).tolist()

    @property
    def n_periods(self) -> int:
        return len(self.v) - 1

    def to_csv(self, path) -> None:
        n = self.n_periods
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["stage", "date", "price", "V", "u", "K", "d_global", "d_episode",
                        "restarted", "cost_paid"])
            for k in range(n + 1):
                last = k == n
                w.writerow([
                    k,
                    "" if self.dates is None else str(self.dates[k]),
                    "" if self.prices is None else repr(float(self.prices[k])),
                    repr(float(self.v[k])),
                    "" if last else repr(float(self.u[k])),
                    "" if last else repr(float(self.k_gain[k])),
                    repr(float(self.d[k])),
                    repr(float(self.episode_d[k])),
                    "" if last else int(self.restarted[k]),
                    repr(float(self.costs_paid[k])),
                ])


@dataclass(frozen=True)
class Metrics:
    d_star: float
    cum_return: float
    sharpe_n: float
    n_restarts: int = 0
    total_costs: float = 0.0
    max_episode_d: float = 0.0

    def to_dict(self) -> dict:
        return {
            "d_star": self.d_star,
            "cum_return": self.cum_return,
            "sharpe_n": self.sharpe_n,
            "n_restarts": self.n_restarts,
            "total_costs": self.total_costs,
            "max_episode_d": self.max_episode_d,
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def run_backtest(
    policy: PolicyConfig | BuyAndHold,
    returns: ReturnSeries | np.ndarray,
    rates: RatePath | np.ndarray | float = DEFAULT_DAILY_RATE,
    cost: CostModel = CostModel(),
    v0: float = DEFAULT_V0,
    *,
    support: SupportEstimate | None = None,
    prices: np.ndarray | None = None,
    dates: np.ndarray | None = None,
) -> Trajectory:
    """Simulate one policy along a return path.

    Each stage: restart check on the episode drawdown, position from the
    policy, proportional cost on the change from the drifted previous
    position, settlement, drawdown bookkeeping.

    If ``support`` is given, every return must lie inside it (a violation
    raises with the stage index) and modulation positions are kept inside
    the admissible interval. Without it the path is traded as is, which is
    how an out-of-sample test runs when fresh returns can exceed the
    in-sample range.
    """
    x = np.asarray(getattr(returns, "returns", returns), dtype=np.float64)
    n = len(x)
    if n == 0:
        raise BacktestError("empty return path")
    rf = np.asarray(getattr(rates, "rates", rates), dtype=np.float64)
    rf = np.broadcast_to(rf, (n,)) if rf.ndim == 0 else rf
    if rf.shape != (n,):
        raise BacktestError(f"rate path length {len(rf)} != return path length {n}")
    if np.any(rf < 0):
        raise BacktestError("riskless rates must be nonnegative")
    if v0 <= 0:
        raise BacktestError("initial account value must be positive")

    if isinstance(policy, BuyAndHold):
        kind, gamma, alpha, d_max, eps, restart, cash = (
            kernels.POLICY_BUYHOLD, 1.0, 1.0, 0.5, 0.05, False, False)
    else:
        kind = kernels.POLICY_MODULATION
        gamma, alpha, d_max = policy.gamma, policy.alpha, policy.spec.d_max
        eps, restart, cash = policy.epsilon, policy.restart_enabled, policy.cash_financing
        if restart and policy.horizon != n:
            raise BacktestError(
                f"policy horizon {policy.horizon} does not match path length {n}"
            )
    if support is not None and np.any(rf >= support.x_max):
        raise BacktestError("riskless rate must stay below x_max")

    status, stage, out = kernels.backtest_path(
        x, rf, kind, gamma, alpha, d_max, eps, restart, cash, cost.rate, v0,
        support is not None,
        support.x_min if support is not None else -1.0,
        support.x_max if support is not None else 1.0,
    )
    if status == kernels.ERR_SUPPORT:
        raise BacktestError(
            f"return {x[stage]!r} at stage {stage} outside support "
            f"[{support.x_min}, {support.x_max}]"
        )
    if status == kernels.ERR_NONPOSITIVE:
        raise BacktestError(f"account value reached zero at stage {stage}")

    for name, arr in (("dates", dates), ("prices", prices)):
        if arr is not None and len(arr) != n + 1:
            raise BacktestError(f"{name} must have one entry per stage ({n + 1})")
    return Trajectory(
        v=out["v"], u=out["u"], k_gain=out["K"], d=out["d_global"],
        episode_d=out["d_episode"], restarted=out["restarted"],
        costs_paid=out["cost_paid"], gain_multiplier=out["gain_multiplier"],
        dates=dates, prices=prices,
    )


def max_drawdown(t: Trajectory | Sequence[float]) -> float:
    v = np.asarray(t.v if isinstance(t, Trajectory) else t, dtype=np.float64)
    if v.size == 0:
        raise BacktestError("empty trajectory")
    peak = np.maximum.accumulate(v)
    return float(np.max((peak - v) / peak))


def cumulative_return(t: Trajectory | Sequence[float]) -> float:
    v = np.asarray(t.v if isinstance(t, Trajectory) else t, dtype=np.float64)
    if v.size == 0:
        raise BacktestError("empty trajectory")
    return float((v[-1] - v[0]) / v[0])


def sharpe_n(t: Trajectory | Sequence[float], r_f_per_period: float = DEFAULT_DAILY_RATE) -> float:
    """sqrt(N) times the per-period Sharpe ratio of the account returns.

    Uses the sample standard deviation (divisor n - 1).
    """
    v = np.asarray(t.v if isinstance(t, Trajectory) else t, dtype=np.float64)
    if v.size < 3:
        raise BacktestError("need at least 3 account values for a Sharpe ratio")
    rho = v[1:] / v[:-1] - 1.0
    sigma = float(np.std(rho, ddof=1))
    if sigma == 0.0:
        raise BacktestError("zero return variance: Sharpe ratio undefined")
    n = rho.size
    return math.sqrt(n) * (float(np.mean(rho)) - r_f_per_period) / sigma


def compute_metrics(t: Trajectory, r_f_per_period: float = DEFAULT_DAILY_RATE) -> Metrics:
    try:
        sr = sharpe_n(t, r_f_per_period)
    except BacktestError:
        sr = float("nan")
    return Metrics(
        d_star=max_drawdown(t),
        cum_return=cumulative_return(t),
        sharpe_n=sr,
        n_restarts=len(t.restarts),
        total_costs=float(t.costs_paid[-1]),
        max_episode_d=float(np.max(t.episode_d)),
    )


@dataclass
class ComparisonReport:
    names: list[str]
    trajectories: list[Trajectory]
    metrics: list[Metrics]
    cost_rates: list[float] = field(default_factory=list)

    ROWS = (
        ("Maximum percentage drawdown d*", "d_star", "pct"),
        ("Cumulative rate of return", "cum_return", "pct"),
        ("N-period Sharpe ratio sqrt(N)*SR", "sharpe_n", "num"),
        ("Restarts", "n_restarts", "int"),
        ("Max episode drawdown", "max_episode_d", "pct"),
        ("Total costs", "total_costs", "num"),
    )

    def table(self) -> str:
        def fmt(val, kind):
            if kind == "pct":
                return f"{100 * val:.2f}%"
            if kind == "int":
                return str(val)
            return f"{val:.4f}"

        header = ["Trading policy"] + self.names
        rows = [[label] + [fmt(getattr(m, attr), kind) for m in self.metrics]
                for label, attr, kind in self.ROWS]
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
        lines = [" | ".join(c.ljust(w) for c, w in zip(header, widths))]
        lines.append("-+-".join("-" * w for w in widths))
        lines += [" | ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        return "\n".join(line.rstrip() for line in lines)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            keys = list(Metrics.__dataclass_fields__)
            w.writerow(["policy", "cost_rate"] + keys)
            for name, rate, m in zip(self.names, self.cost_rates, self.metrics):
                d = m.to_dict()
                w.writerow([name, repr(rate)] + [repr(d[k]) for k in keys])


def compare(
    policies: Sequence[tuple[str, PolicyConfig | BuyAndHold]],
    returns,
    rates=DEFAULT_DAILY_RATE,
    cost: CostModel = CostModel(),
    v0: float = DEFAULT_V0,
    *,
    r_f_per_period: float | None = None,
    **kwargs,
) -> ComparisonReport:
    if not policies:
        raise BacktestError("compare needs at least one policy")
    if r_f_per_period is None:
        r_f_per_period = float(np.mean(getattr(rates, "rates", rates)))
    names, trajs, mets = [], [], []
    for name, pol in policies:
        t = run_backtest(pol, returns, rates, cost, v0, **kwargs)
        names.append(name)
        trajs.append(t)
        mets.append(compute_metrics(t, r_f_per_period))
    return ComparisonReport(names, trajs, mets, [cost.rate] * len(names))

"""Account dynamics, percentage-drawdown accounting and admissible positions.

The admissible interval for the risky position ``u`` at a stage with
drawdown ``d``, value ``V`` and riskless rate ``r`` is::

    -(M + r) / (x_max - r) * V  <=  u  <=  (M + r) / (|x_min| + r) * V

with headroom ``M = (d_max - d) / (1 - d)``. Staying inside it keeps the
next-stage drawdown at or below ``d_max`` for every return in the support.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import SupportEstimate

# rounding slack tolerated when d drifts just past d_max
DRIFT_TOL = 1e-9


class DrawdownError(ValueError):
    pass


@dataclass(frozen=True)
class DrawdownSpec:
    d_max: float

    def __post_init__(self):
        if not 0.0 < self.d_max < 1.0:
            raise DrawdownError(f"d_max must lie in (0, 1), got {self.d_max}")


@dataclass(frozen=True)
class DrawdownState:
    v: float
    v_max: float
    d: float

    @classmethod
    def start(cls, v0: float) -> "DrawdownState":
        if v0 <= 0:
            raise DrawdownError("initial account value must be positive")
        return cls(v0, v0, 0.0)

    def __post_init__(self):
        if self.v <= 0 or self.v_max <= 0:
            raise DrawdownError("account values must be positive")
        if self.v > self.v_max:
            raise DrawdownError(f"v={self.v} exceeds running peak v_max={self.v_max}")
        assert self.d == (self.v_max - self.v) / self.v_max, "drawdown out of sync"


@dataclass(frozen=True)
class PositionBounds:
    lower: float
    upper: float

    def contains(self, u: float, rtol: float = 1e-12) -> bool:
        slack = rtol * max(abs(self.lower), abs(self.upper), 1.0)
        return self.lower - slack <= u <= self.upper + slack


@dataclass(frozen=True)
class GammaInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < 0.0 < self.hi:
            raise DrawdownError(f"gain interval must bracket 0, got [{self.lo}, {self.hi}]")

    def __contains__(self, gamma: float) -> bool:
        return self.lo <= gamma <= self.hi

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi}


def percentage_drawdown(v: float, v_max: float) -> float:
    if v <= 0 or v_max <= 0:
        raise DrawdownError("account values must be positive")
    if v > v_max:
        raise DrawdownError(f"v={v} exceeds peak v_max={v_max}")
    return (v_max - v) / v_max


def modulation(d: float, spec: DrawdownSpec) -> float:
    """Headroom ``(d_max - d) / (1 - d)``, in ``[0, d_max]``."""
    if d < 0 or d >= 1:
        raise DrawdownError(f"drawdown must lie in [0, 1), got {d}")
    if d > spec.d_max:
        if d - spec.d_max > DRIFT_TOL:
            raise DrawdownError(f"drawdown {d} already exceeds d_max={spec.d_max}")
        d = spec.d_max
    return (spec.d_max - d) / (1.0 - d)


def lemma_bounds(
    state: DrawdownState, spec: DrawdownSpec, r_f: float, support: SupportEstimate
) -> PositionBounds:
    if r_f < 0:
        raise DrawdownError("riskless rate must be nonnegative")
    if r_f >= support.x_max:
        raise DrawdownError(f"riskless rate {r_f} must be below x_max={support.x_max}")
    m = modulation(state.d, spec)
    head = m + r_f
    if head == 0.0:
        return PositionBounds(0.0, 0.0)
    lower = -head / (support.x_max - r_f) * state.v
    upper = head / (abs(support.x_min) + r_f) * state.v
    return PositionBounds(lower, upper)


def account_step(v: float, u: float, x: float, r_f: float) -> float:
    return v + u * x + (v - u) * r_f


def update_state(state: DrawdownState, v_next: float) -> DrawdownState:
    if v_next <= 0:
        raise DrawdownError(f"account value fell to {v_next}")
    v_max = max(state.v_max, v_next)
    return DrawdownState(v_next, v_max, (v_max - v_next) / v_max)


def feasible_gamma(
    support: SupportEstimate, r_f_max: float, r_f_min: float | None = None
) -> GammaInterval:
    """Gain interval keeping ``gamma * M * V`` admissible at every stage.

    The upper end uses the largest rate. The lower end is written with the
    largest rate too, which is exact for a constant rate path; when rates
    vary, pass ``r_f_min`` so the short side is sized against the smallest
    rate, the binding case for a short position.
    """
    if r_f_max < 0:
        raise DrawdownError("riskless rate must be nonnegative")
    if r_f_max >= support.x_max:
        raise DrawdownError(f"max riskless rate {r_f_max} must be below x_max={support.x_max}")
    r_lo = r_f_max if r_f_min is None else r_f_min
    if not 0 <= r_lo <= r_f_max:
        raise DrawdownError("need 0 <= r_f_min <= r_f_max")
    return GammaInterval(-1.0 / (support.x_max - r_lo), 1.0 / (abs(support.x_min) + r_f_max))


def feasible_gamma_for_rates(support: SupportEstimate, rates) -> GammaInterval:
    r = np.asarray(getattr(rates, "rates", rates), dtype=np.float64)
    return feasible_gamma(support, float(r.max()), float(r.min()))

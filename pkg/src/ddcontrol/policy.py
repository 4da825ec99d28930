"""Drawdown modulation policy with optional restarts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .drawdown import (
    DrawdownSpec,
    DrawdownState,
    GammaInterval,
    lemma_bounds,
    modulation,
)
from .market_data import SupportEstimate


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyConfig:
    """Parameters of a modulation policy.

    Attributes:
        gamma: gain traded before any restart.
        spec: drawdown limit.
        cash_financing: clamp the exposure ratio to ``[-1, 1]``.
        alpha: fraction applied to ``gamma`` at a restart.
        epsilon: restart fires once episode drawdown + epsilon > d_max.
        restart_enabled: turn the restart mechanism on.
        horizon: number of trading periods N, used by the forgetting factor.
        interval: if given, ``gamma`` must lie inside it.
    """

    gamma: float
    spec: DrawdownSpec
    cash_financing: bool = True
    alpha: float = 1.0
    epsilon: float | None = None
    restart_enabled: bool = False
    horizon: int = 1
    interval: GammaInterval | None = None

    def __post_init__(self):
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", self.spec.d_max / 10.0)
        if not 0.0 < self.epsilon < self.spec.d_max:
            raise PolicyError(f"epsilon must lie in (0, d_max), got {self.epsilon}")
        if not 0.0 < self.alpha <= 1.0:
            raise PolicyError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.horizon < 1:
            raise PolicyError("horizon must be a positive stage count")
        if self.interval is not None and self.gamma not in self.interval:
            raise PolicyError(
                f"gamma={self.gamma} outside feasible interval "
                f"[{self.interval.lo}, {self.interval.hi}]"
            )


@dataclass(frozen=True)
class PolicyState:
    effective_gamma: float
    episode_state: DrawdownState
    restart_log: tuple[int, ...] = field(default_factory=tuple)

    @classmethod
    def initial(cls, cfg: PolicyConfig, v0: float) -> "PolicyState":
        return cls(cfg.gamma, DrawdownState.start(v0))


@dataclass(frozen=True)
class PositionDecision:
    k_gain: float
    u: float
    restarted: bool = False


def gain(state: PolicyState, cfg: PolicyConfig) -> float:
    k = state.effective_gamma * modulation(state.episode_state.d, cfg.spec)
    if cfg.cash_financing:
        k = min(1.0, max(-1.0, k))
    return k


def position(
    state: PolicyState,
    cfg: PolicyConfig,
    v: float,
    *,
    r_f: float | None = None,
    support: SupportEstimate | None = None,
    restarted: bool = False,
) -> PositionDecision:
    """Exposure ``u = K * v``.

    With ``support`` and ``r_f`` supplied the result is checked against the
    admissible interval; leaving it means the gain was outside the feasible
    set, which is a bug in the caller.
    """
    if v <= 0:
        raise PolicyError("account value must be positive")
    k = gain(state, cfg)
    u = k * v
    if support is not None:
        bounds = lemma_bounds(
            state.episode_state, cfg.spec, 0.0 if r_f is None else r_f, support
        )
        if not bounds.contains(u):
            raise PolicyError(
                f"position {u} outside admissible [{bounds.lower}, {bounds.upper}]"
            )
    return PositionDecision(k, u, restarted)


def should_restart(d: float, cfg: PolicyConfig) -> bool:
    return d + cfg.epsilon > cfg.spec.d_max


def apply_restart(state: PolicyState, cfg: PolicyConfig, k0: int, v_now: float) -> PolicyState:
    if state.restart_log and k0 <= state.restart_log[-1]:
        raise PolicyError(f"restart stage {k0} not after previous {state.restart_log[-1]}")
    # forgetting factor recomputed from the base gain; restarts do not compound
    g = cfg.gamma * cfg.alpha * math.exp(-k0 / cfg.horizon)
    return PolicyState(g, DrawdownState.start(v_now), state.restart_log + (k0,))


def buy_and_hold_position(v: float) -> PositionDecision:
    if v <= 0:
        raise PolicyError("account value must be positive")
    return PositionDecision(1.0, v, False)

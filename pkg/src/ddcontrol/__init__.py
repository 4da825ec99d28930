"""Drawdown-modulated trading: policy, gain search and backtests."""
from .backtest import (
    BuyAndHold,
    CostModel,
    Metrics,
    Trajectory,
    compare,
    compute_metrics,
    cumulative_return,
    max_drawdown,
    run_backtest,
    sharpe_n,
)
from .drawdown import (
    DrawdownSpec,
    DrawdownState,
    GammaInterval,
    PositionBounds,
    account_step,
    feasible_gamma,
    feasible_gamma_for_rates,
    lemma_bounds,
    modulation,
    percentage_drawdown,
    update_state,
)
from .market_data import (
    PriceSeries,
    RatePath,
    ReturnSeries,
    SupportEstimate,
    bootstrap_paths,
    compute_returns,
    estimate_support,
    load_prices,
    split,
)
from .optimizer import GammaGrid, evaluate_objective, fractionalize, grid_search
from .policy import (
    PolicyConfig,
    PolicyState,
    apply_restart,
    buy_and_hold_position,
    gain,
    position,
    should_restart,
)

__version__ = "0.1.0"

__all__ = [
    "account_step",
    "apply_restart",
    "bootstrap_paths",
    "buy_and_hold_position",
    "BuyAndHold",
    "compare",
    "compute_metrics",
    "compute_returns",
    "CostModel",
    "cumulative_return",
    "DrawdownSpec",
    "DrawdownState",
    "estimate_support",
    "evaluate_objective",
    "feasible_gamma",
    "feasible_gamma_for_rates",
    "fractionalize",
    "gain",
    "GammaGrid",
    "GammaInterval",
    "grid_search",
    "lemma_bounds",
    "load_prices",
    "max_drawdown",
    "Metrics",
    "modulation",
    "percentage_drawdown",
    "PolicyConfig",
    "PolicyState",
    "position",
    "PositionBounds",
    "PriceSeries",
    "RatePath",
    "ReturnSeries",
    "run_backtest",
    "sharpe_n",
    "should_restart",
    "split",
    "SupportEstimate",
    "Trajectory",
    "update_state",
]

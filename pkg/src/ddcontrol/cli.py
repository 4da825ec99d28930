"""Command-line pipeline: ingest -> optimize -> backtest / compare.

Settings come from built-in defaults, then an optional ``key = value``
config file (``--config``), then command-line flags; later sources win.

    ddcontrol optimize --data vt.csv --split-date 2020-01-02 --d-max 0.1 --out runs/vt
    ddcontrol compare  --data vt.csv --split-date 2020-01-02 --d-max 0.1 --out runs/vt
"""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import market_data as md
from .backtest import (
    BuyAndHold,
    ComparisonReport,
    CostModel,
    compare,
    compute_metrics,
    run_backtest,
)
from .drawdown import DrawdownSpec, feasible_gamma
from .optimizer import GammaGrid, fractionalize, grid_search
from .policy import PolicyConfig

log = logging.getLogger("ddcontrol")

POLICIES = ("buyhold", "modulation", "modulation-restart")


@dataclass
class RunConfig:
    data: str | None = None
    date_col: str = "Date"
    price_col: str = "Close"
    start_date: str | None = None
    end_date: str | None = None
    split_date: str | None = None
    d_max: float = 0.1
    epsilon: float | None = None  # defaults to d_max / 10
    alpha: float = 1.0  # fraction applied to the optimised gain
    restart_alpha: float = 1.0  # extra fraction applied at each restart
    gamma: float | None = None  # skip optimisation and trade this gain
    cash_financing: bool = True
    resolution: int = 2001
    tie_tolerance: float = 1e-4
    cost_rate: float = 0.0
    optimize_with_cost: bool = False
    rate: float = 0.01 / 365
    v0: float = 1.0
    support_margin: float = 0.0
    seed: int = 0
    n_paths: int = 0  # 0: optimise on the single historical path
    horizon: int | None = None  # bootstrap path length, default in-sample length
    out: str = "out"

    def __post_init__(self):
        if self.epsilon is None:
            self.epsilon = self.d_max / 10.0
        DrawdownSpec(self.d_max)
        if not 0 < self.epsilon < self.d_max:
            raise ValueError("epsilon must lie in (0, d_max)")
        for name in ("alpha", "restart_alpha"):
            if not 0 < getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        CostModel(self.cost_rate)

    @property
    def out_dir(self) -> Path:
        p = Path(self.out)
        p.mkdir(parents=True, exist_ok=True)
        return p


def _coerce(field: dataclasses.Field, raw: str):
    kind = str(field.type)
    if raw.strip().lower() in ("", "none", "null") and "None" in kind:
        return None
    if "bool" in kind:
        if raw.strip().lower() in ("1", "true", "yes", "on"):
            return True
        if raw.strip().lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{field.name}: not a boolean: {raw!r}")
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw.strip()


def read_config_file(path) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    text = Path(path).read_text()
    parser.read_string("[run]\n" + text)
    known = {f.name: f for f in fields(RunConfig)}
    values = {}
    for key, raw in parser["run"].items():
        name = key.replace("-", "_")
        if name not in known:
            raise ValueError(f"{path}: unknown config key {key!r}")
        values[name] = _coerce(known[name], raw)
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def _load(cfg: RunConfig):
    if not cfg.data:
        raise ValueError("no data file given (--data)")
    prices = md.load_prices(cfg.data, cfg.date_col, cfg.price_col)
    if cfg.start_date or cfg.end_date:
        lo = np.datetime64(cfg.start_date or prices.dates[0], "D")
        hi = np.datetime64(cfg.end_date or prices.dates[-1], "D")
        keep = (prices.dates >= lo) & (prices.dates <= hi)
        prices = md.PriceSeries(prices.dates[keep], prices.prices[keep])
    if cfg.split_date is None:
        raise ValueError("no split date given (--split-date)")
    return md.split(prices, cfg.split_date)


def _in_sample(cfg: RunConfig):
    ins, _ = _load(cfg)
    r = md.compute_returns(ins)
    support = md.estimate_support(r, cfg.support_margin)
    interval = feasible_gamma(support, cfg.rate)
    return r, support, interval


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_ingest(cfg: RunConfig) -> dict:
    ins, outs = _load(cfg)
    r_in, r_out = md.compute_returns(ins), md.compute_returns(outs)
    support = md.estimate_support(r_in, cfg.support_margin)
    interval = feasible_gamma(support, cfg.rate)
    out = cfg.out_dir
    md.write_returns_csv(out / "returns_in_sample.csv", r_in)
    md.write_returns_csv(out / "returns_out_of_sample.csv", r_out)
    summary = {
        "in_sample": {"start": str(ins.dates[0]), "end": str(ins.dates[-1]), "n_returns": len(r_in)},
        "out_of_sample": {"start": str(outs.dates[0]), "end": str(outs.dates[-1]),
                          "n_returns": len(r_out)},
        "support": support.to_dict(),
        "gamma_interval": interval.to_dict(),
    }
    _write_json(out / "support.json", summary)
    return summary


def cmd_optimize(cfg: RunConfig):
    r, support, interval = _in_sample(cfg)
    if cfg.n_paths > 0:
        horizon = cfg.horizon or len(r)
        paths = md.bootstrap_paths(r, cfg.n_paths, horizon, cfg.seed)
    else:
        paths = r.returns[None, :]
    rates = np.full(paths.shape[1], cfg.rate)
    result = grid_search(
        GammaGrid(interval, cfg.resolution), paths, rates, DrawdownSpec(cfg.d_max),
        cfg.cash_financing, cfg.tie_tolerance, support=support,
        cost_rate=cfg.cost_rate if cfg.optimize_with_cost else 0.0,
    )
    out = cfg.out_dir
    result.curve.to_csv(out / "gamma_curve.csv")
    payload = result.to_dict()
    payload.update({
        "gamma": fractionalize(result.gamma_star, cfg.alpha),
        "alpha": cfg.alpha,
        "gamma_interval": interval.to_dict(),
        "support": support.to_dict(),
        "mode": "bootstrap" if cfg.n_paths > 0 else "historical",
        "n_paths": int(paths.shape[0]),
        "horizon": int(paths.shape[1]),
    })
    _write_json(out / "optimization.json", payload)
    return result, payload


def _trading_gain(cfg: RunConfig) -> float:
    if cfg.gamma is not None:
        return cfg.gamma
    opt = Path(cfg.out) / "optimization.json"
    if not opt.is_file():
        raise ValueError(
            f"no gain available: pass --gamma or run 'optimize' first (looked for {opt})"
        )
    gamma_star = json.loads(opt.read_text())["gamma_star"]
    return fractionalize(gamma_star, cfg.alpha)


def _policies(cfg: RunConfig, names, n: int, interval):
    gamma = _trading_gain(cfg)
    spec = DrawdownSpec(cfg.d_max)
    built = []
    for name in names:
        if name == "buyhold":
            built.append((name, BuyAndHold()))
        elif name in ("modulation", "modulation-restart"):
            built.append((name, PolicyConfig(
                gamma, spec, cfg.cash_financing, cfg.restart_alpha, cfg.epsilon,
                restart_enabled=name == "modulation-restart", horizon=n, interval=interval,
            )))
        else:
            raise ValueError(f"unknown policy {name!r}; choose from {POLICIES}")
    return built


def cmd_backtest(cfg: RunConfig, policy_name: str):
    _, _, interval = _in_sample(cfg)
    _, outs = _load(cfg)
    r = md.compute_returns(outs)
    [(name, pol)] = _policies(cfg, [policy_name], len(r), interval)
    t = run_backtest(pol, r, np.full(len(r), cfg.rate), CostModel(cfg.cost_rate), cfg.v0,
                     prices=outs.prices, dates=outs.dates)
    m = compute_metrics(t, cfg.rate)
    out = cfg.out_dir
    t.to_csv(out / "trajectory.csv")
    m.to_json(out / "metrics.json")
    return t, m


def cmd_compare(cfg: RunConfig, names=POLICIES) -> ComparisonReport:
    if not names:
        raise ValueError("compare needs at least one policy")
    _, _, interval = _in_sample(cfg)
    _, outs = _load(cfg)
    r = md.compute_returns(outs)
    pols = _policies(cfg, names, len(r), interval)
    rates = np.full(len(r), cfg.rate)
    kw = dict(r_f_per_period=cfg.rate, prices=outs.prices, dates=outs.dates)
    report = compare(pols, r, rates, CostModel(0.0), cfg.v0, **kw)
    if cfg.cost_rate > 0:
        costly = compare(pols, r, rates, CostModel(cfg.cost_rate), cfg.v0, **kw)
        report = ComparisonReport(
            report.names + [f"{n} (cost {cfg.cost_rate:g})" for n in costly.names],
            report.trajectories + costly.trajectories,
            report.metrics + costly.metrics,
            report.cost_rates + costly.cost_rates,
        )
    report.to_csv(cfg.out_dir / "compare.csv")
    return report


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--data", help="price CSV with a header row")
    p.add_argument("--date-col", dest="date_col")
    p.add_argument("--price-col", dest="price_col")
    p.add_argument("--start-date", dest="start_date")
    p.add_argument("--end-date", dest="end_date")
    p.add_argument("--split-date", dest="split_date", help="last in-sample / first out-of-sample date")
    p.add_argument("--d-max", dest="d_max", type=float)
    p.add_argument("--epsilon", type=float, help="restart threshold (default d_max/10)")
    p.add_argument("--alpha", type=float, help="fraction of the optimised gain to trade")
    p.add_argument("--restart-alpha", dest="restart_alpha", type=float)
    p.add_argument("--gamma", type=float, help="trade this gain instead of the optimised one")
    p.add_argument("--cash-financing", dest="cash_financing",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--resolution", type=int, help="gain grid points")
    p.add_argument("--tie-tolerance", dest="tie_tolerance", type=float)
    p.add_argument("--cost-rate", dest="cost_rate", type=float)
    p.add_argument("--optimize-with-cost", dest="optimize_with_cost",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--rate", type=float, help="riskless rate per period")
    p.add_argument("--v0", type=float)
    p.add_argument("--support-margin", dest="support_margin", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-paths", dest="n_paths", type=int, help="bootstrap paths (0: historical)")
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddcontrol", description="Drawdown-modulation trading backtests"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("ingest", "parse prices, write returns and the support estimate"),
        ("optimize", "grid-search the gain on the in-sample window"),
        ("backtest", "simulate one policy out of sample"),
        ("compare", "simulate all policies side by side"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_run_args(p)
        if name == "backtest":
            p.add_argument("--policy", choices=POLICIES, default="modulation-restart")
        if name == "compare":
            p.add_argument("--policies", nargs="*", default=list(POLICIES),
                           help=f"subset of {POLICIES}")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "ingest":
            summary = cmd_ingest(cfg)
            print(json.dumps(summary, indent=2, sort_keys=True))
        elif args.command == "optimize":
            result, payload = cmd_optimize(cfg)
            print(f"gamma* = {result.gamma_star:.6g}  J* = {result.j_star:.6g}  "
                  f"Gamma = [{payload['gamma_interval']['lo']:.4g}, "
                  f"{payload['gamma_interval']['hi']:.4g}]  traded gain = {payload['gamma']:.6g}")
        elif args.command == "backtest":
            _, m = cmd_backtest(cfg, args.policy)
            print(json.dumps(m.to_dict(), indent=2, sort_keys=True))
        elif args.command == "compare":
            print(cmd_compare(cfg, args.policies).table())
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"ddcontrol {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

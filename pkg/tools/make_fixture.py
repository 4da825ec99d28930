"""Regenerate the frozen synthetic fixtures under tests/data/.

Prices come from a seeded stdlib RNG; expected outputs come from the plain
Python recursions in tests/reference_impl.py, never from the package.

    python tools/make_fixture.py
"""
import csv
import datetime as dt
import json
import math
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
import reference_impl as ref  # noqa: E402

DATA = ROOT / "tests" / "data"
START, SPLIT, END = dt.date(2019, 1, 2), dt.date(2020, 1, 2), dt.date(2022, 9, 20)
CRASH = (dt.date(2020, 2, 20), dt.date(2020, 4, 7))
BEAR = (dt.date(2022, 1, 1), dt.date(2022, 6, 30))
RATE = 0.01 / 365
RESOLUTION = 2001
TOL = 1e-4


def make_prices(seed, weekdays_only, drift, vol, crash_drift, crash_vol, p0, bound):
    """Log returns clipped to [-bound, bound]; both extremes occur in-sample."""
    rng = random.Random(seed)
    day, price, rows = START, p0, []
    forced = {dt.date(2019, 5, 13): -bound, dt.date(2019, 8, 14): bound}
    while day <= END:
        if not weekdays_only or day.weekday() < 5:
            rows.append((day.isoformat(), price))
            if CRASH[0] <= day <= CRASH[1]:
                mu, sd = crash_drift, crash_vol
            elif BEAR[0] <= day <= BEAR[1]:
                mu, sd = -abs(drift), vol * 1.3
            else:
                mu, sd = drift, vol
            step = forced.get(day, rng.gauss(mu, sd))
            price *= math.exp(max(-bound, min(bound, step)))
        day += dt.timedelta(days=1)
    return rows


def build(name, rows, d_max, alpha):
    with (DATA / f"{name}.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Date", "Close"])
        w.writerows((d, repr(p)) for d, p in rows)
    # reload exactly as written
    prices = [float(repr(p)) for _, p in rows]
    dates = [d for d, _ in rows]
    cut = max(i for i, d in enumerate(dates) if d <= SPLIT.isoformat())
    x_in = ref.returns_from_prices(prices[: cut + 1])
    x_out = ref.returns_from_prices(prices[cut:])
    x_min, x_max = min(x_in), max(x_in)
    lo, hi = ref.gain_interval(x_min, x_max, RATE)
    g_star, j_star = ref.search(x_in, RATE, d_max, True, lo, hi, RESOLUTION, TOL)
    gamma = alpha * g_star
    probes = {}
    for g in (lo, lo / 2, 0.0, hi / 4, hi / 2, hi):
        for cash in (True, False):
            probes[f"{g!r}|{int(cash)}"] = ref.terminal_ratio(g, x_in, RATE, d_max, cash)[0]

    runs = {}
    for cost in (0.0, 0.001):
        for pol in ("buyhold", "modulation", "modulation-restart"):
            values, ep_dd, restarts, paid = ref.simulate(
                x_out, RATE, pol, gamma=gamma, d_max=d_max, cost=cost)
            m = ref.metrics(values, RATE)
            m.update({
                "final_v": values[-1],
                "restarts": restarts,
                "total_costs": paid,
                "max_episode_d": max(ep_dd),
            })
            runs[f"{pol}|{cost!r}"] = m
    return {
        "file": f"{name}.csv",
        "d_max": d_max,
        "alpha": alpha,
        "rate": RATE,
        "split": SPLIT.isoformat(),
        "n_in": len(x_in),
        "n_out": len(x_out),
        "x_min": x_min,
        "x_max": x_max,
        "gamma_lo": lo,
        "gamma_hi": hi,
        "resolution": RESOLUTION,
        "tie_tolerance": TOL,
        "gamma_star": g_star,
        "j_star": j_star,
        "gamma_traded": gamma,
        "objective_probes": probes,
        "runs": runs,
    }


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    etf = make_prices(19, True, 0.0005, 0.008, -0.006, 0.03, 75.0, 0.06)
    coin = make_prices(28, False, 0.002, 0.035, -0.008, 0.06, 3800.0, 0.15)
    expected = {
        "etf": build("synthetic_etf", etf, 0.1, 1.0),
        "crypto": build("synthetic_crypto", coin, 0.2, 0.5),
    }
    (DATA / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n")
    for k, v in expected.items():
        print(k, "gamma*", v["gamma_star"], "Gamma", (v["gamma_lo"], v["gamma_hi"]))
        for run, m in v["runs"].items():
            print("   ", run, {kk: m[kk] for kk in ("d_star", "cum_return", "sharpe_n")},
                  len(m["restarts"]))


if __name__ == "__main__":
    main()

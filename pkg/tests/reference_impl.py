"""Straight-line reference recursions in plain Python (no numpy, no package code).

Used once to freeze the fixture expectations and as an independent oracle
in the tests. Terminal wealth is accumulated in product form
``w *= 1 + r + K * (x - r)`` rather than through the account-step update.
"""
import math
import statistics


def returns_from_prices(prices):
    return [(b - a) / a for a, b in zip(prices, prices[1:])]


def gain_interval(x_min, x_max, rate):
    return -1.0 / (x_max - rate), 1.0 / (abs(x_min) + rate)


def headroom(d, d_max):
    if d >= d_max:
        return 0.0
    return (d_max - d) / (1.0 - d)


def terminal_ratio(gamma, xs, rate, d_max, cash):
    w, peak, worst = 1.0, 1.0, 0.0
    for x in xs:
        k = gamma * headroom((peak - w) / peak, d_max)
        if cash:
            k = max(-1.0, min(1.0, k))
        w *= 1.0 + rate + k * (x - rate)
        peak = max(peak, w)
        worst = max(worst, (peak - w) / peak)
    return w, worst


def grid(lo, hi, n):
    pts = [lo + (hi - lo) * (i / (n - 1)) for i in range(n)]
    pts[-1] = hi
    return sorted(set(pts + [0.0]))


def search(xs, rate, d_max, cash, lo, hi, n, tol):
    gs = grid(lo, hi, n)
    js = [terminal_ratio(g, xs, rate, d_max, cash)[0] for g in gs]
    best = max(js)
    for g, j in zip(gs, js):
        if j >= best * (1.0 - tol):
            return g, best


def simulate(xs, rate, policy, gamma=0.0, d_max=0.1, eps=None, alpha=1.0, cash=True,
             cost=0.0, v0=1.0):
    """policy: 'buyhold', 'modulation' or 'modulation-restart'."""
    if eps is None:
        eps = d_max / 10
    n = len(xs)
    v, peak, ep_peak = v0, v0, v0
    g_now = gamma
    carry, paid = 0.0, 0.0
    values, ep_dd, restarts = [v0], [0.0], []
    for k, x in enumerate(xs):
        ed = (ep_peak - v) / ep_peak
        if policy == "modulation-restart" and ed + eps > d_max:
            restarts.append(k)
            ep_peak, ed = v, 0.0
            g_now = gamma * alpha * math.exp(-k / n)
        if policy == "buyhold":
            kk = 1.0
        else:
            kk = g_now * headroom(ed, d_max)
            if cash:
                kk = max(-1.0, min(1.0, kk))
        u = kk * v
        c = cost * abs(u - carry)
        paid += c
        v = (v - c) + u * x + ((v - c) - u) * rate
        carry = u * (1.0 + x)
        peak, ep_peak = max(peak, v), max(ep_peak, v)
        values.append(v)
        ep_dd.append((ep_peak - v) / ep_peak)
    return values, ep_dd, restarts, paid


def metrics(values, rate):
    peak, dstar = values[0], 0.0
    for v in values:
        peak = max(peak, v)
        dstar = max(dstar, (peak - v) / peak)
    rho = [b / a - 1.0 for a, b in zip(values, values[1:])]
    sr = (statistics.fmean(rho) - rate) / statistics.stdev(rho)
    return {
        "d_star": dstar,
        "cum_return": (values[-1] - values[0]) / values[0],
        "sharpe_n": math.sqrt(len(rho)) * sr,
    }

"""Hot simulation loops.

Two kernels carry all the per-stage arithmetic:

* ``modulation_batch`` - many independent no-restart modulation paths, one
  gain per path; used by the objective and the grid search.
* ``backtest_path`` - a single path with restarts, cash clamp, proportional
  costs and full trajectory output.

Each has a numba implementation and a numpy one. ``modulation_batch_numpy``
vectorises across paths; ``backtest_path_py`` is the same sequential loop as
the jitted version, run by the interpreter. Both pairs perform identical
floating-point operations in identical order.
"""
from __future__ import annotations

import math

import numpy as np

from . import _accel

ERR_NONE = 0
ERR_SUPPORT = 1
ERR_NONPOSITIVE = 2

POLICY_BUYHOLD = 0
POLICY_MODULATION = 1


def _batch_loop(gammas, x, rf, d_max, cash, cost_rate, x_min, x_max, clip, ratio, dstar):
    # Time outer, paths inner: each stage is a chain of dependent divisions,
    # so independent paths are interleaved to keep the pipeline busy.
    n_paths, n = x.shape
    shared_rf = rf.shape[0] == 1
    xt = np.ascontiguousarray(x.T)
    rt = np.ascontiguousarray(rf.T)
    v = np.ones(n_paths)
    v_peak = np.ones(n_paths)
    worst = np.zeros(n_paths)
    carry = np.zeros(n_paths)
    alive = np.ones(n_paths, dtype=np.bool_)
    for k in range(n):
        xrow = xt[k]
        rrow = rt[k]
        for p in range(n_paths):
            if not alive[p]:
                continue
            r = rrow[0] if shared_rf else rrow[p]
            vv = v[p]
            pk = v_peak[p]
            d = (pk - vv) / pk
            if d >= d_max:
                m = 0.0
            else:
                m = (d_max - d) / (1.0 - d)
            gain = gammas[p] * m
            if cash:
                if gain > 1.0:
                    gain = 1.0
                elif gain < -1.0:
                    gain = -1.0
            u = gain * vv
            if clip:
                head = m + r
                lo = -head / (x_max - r) * vv
                hi = head / (-x_min + r) * vv
                if u > hi:
                    u = hi
                elif u < lo:
                    u = lo
            xk = xrow[p]
            vp = vv - cost_rate * abs(u - carry[p])
            vv = vp + u * xk + (vp - u) * r
            carry[p] = u * (1.0 + xk)
            if vv <= 0.0:
                alive[p] = False
                ratio[p] = vv
                dstar[p] = math.nan
                continue
            if vv > pk:
                pk = vv
            v[p] = vv
            v_peak[p] = pk
            d = (pk - vv) / pk
            if d > worst[p]:
                worst[p] = d
    for p in range(n_paths):
        if alive[p]:
            ratio[p] = v[p]
            dstar[p] = worst[p]


_batch_loop_jit = _accel.njit(cache=True)(_batch_loop)


def modulation_batch_numba(gammas, x, rf, d_max, cash=False, cost_rate=0.0,
                           x_min=-1.0, x_max=1.0, clip=False):
    gammas, x, rf = _prep_batch(gammas, x, rf)
    ratio = np.empty(x.shape[0])
    dstar = np.empty(x.shape[0])
    _batch_loop_jit(gammas, x, rf, float(d_max), bool(cash), float(cost_rate),
                    float(x_min), float(x_max), bool(clip), ratio, dstar)
    return ratio, dstar


def modulation_batch_numpy(gammas, x, rf, d_max, cash=False, cost_rate=0.0,
                           x_min=-1.0, x_max=1.0, clip=False):
    gammas, x, rf = _prep_batch(gammas, x, rf)
    n_paths, n = x.shape
    v = np.ones(n_paths)
    v_peak = np.ones(n_paths)
    worst = np.zeros(n_paths)
    carry = np.zeros(n_paths)
    dead = np.zeros(n_paths, dtype=bool)
    final = np.empty(n_paths)
    for k in range(n):
        r = rf[:, k]
        d = (v_peak - v) / v_peak
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.where(d >= d_max, 0.0, (d_max - d) / (1.0 - d))
        gain = gammas * m
        if cash:
            gain = np.clip(gain, -1.0, 1.0)
        u = gain * v
        if clip:
            head = m + r
            lo = -head / (x_max - r) * v
            hi = head / (-x_min + r) * v
            u = np.where(u > hi, hi, np.where(u < lo, lo, u))
        xk = x[:, k]
        vp = v - cost_rate * np.abs(u - carry)
        v_new = vp + u * xk + (vp - u) * r
        carry = u * (1.0 + xk)
        newly_dead = ~dead & (v_new <= 0.0)
        final[newly_dead] = v_new[newly_dead]
        worst[newly_dead] = np.nan
        dead |= newly_dead
        v = np.where(dead, 1.0, v_new)
        v_peak = np.maximum(v_peak, v)
        d = (v_peak - v) / v_peak
        worst = np.where(dead, worst, np.maximum(worst, d))
    final[~dead] = v[~dead]
    return final, worst


def _prep_batch(gammas, x, rf):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    gammas = np.ascontiguousarray(np.broadcast_to(np.asarray(gammas, dtype=np.float64),
                                                  (x.shape[0],)))
    rf = np.asarray(rf, dtype=np.float64)
    if rf.ndim == 0:
        rf = np.full((1, x.shape[1]), float(rf))
    elif rf.ndim == 1:
        rf = rf[None, :]
    if rf.shape[1] != x.shape[1] or rf.shape[0] not in (1, x.shape[0]):
        raise ValueError(f"rate array shape {rf.shape} does not match paths {x.shape}")
    return gammas, x, np.ascontiguousarray(rf)


def modulation_batch(gammas, x, rf, d_max, cash=False, cost_rate=0.0,
                     x_min=-1.0, x_max=1.0, clip=False):
    """Terminal wealth ratio and maximum drawdown for each path.

    ``x`` holds one return path per row. ``rf`` is a scalar, a shared
    ``(n,)`` rate path or one rate path per row. A path whose value
    reaches zero reports that value and a NaN drawdown.
    """
    impl = modulation_batch_numba if _accel.USE_NUMBA else modulation_batch_numpy
    return impl(gammas, x, rf, d_max, cash, cost_rate, x_min, x_max, clip)


def backtest_path_py(x, rf, policy_kind, gamma, alpha, d_max, eps, restart, cash,
                     cost_rate, v0, check_support, x_min, x_max,
                     v_out, u_out, k_out, dg_out, de_out, restarted, cost_out, geff_out):
    n = x.shape[0]
    v = v0
    peak = v0
    ep_peak = v0
    geff = gamma
    carry = 0.0
    paid = 0.0
    v_out[0] = v0
    dg_out[0] = 0.0
    de_out[0] = 0.0
    cost_out[0] = 0.0
    for k in range(n):
        r = rf[k]
        xk = x[k]
        if check_support and (xk < x_min or xk > x_max):
            return ERR_SUPPORT, k
        ed = (ep_peak - v) / ep_peak
        fired = False
        if policy_kind == POLICY_MODULATION and restart and ed + eps > d_max:
            ep_peak = v
            ed = 0.0
            geff = gamma * alpha * math.exp(-k / n)
            fired = True
        if policy_kind == POLICY_BUYHOLD:
            m = 0.0
            gain = 1.0
        else:
            if ed >= d_max:
                m = 0.0
            else:
                m = (d_max - ed) / (1.0 - ed)
            gain = geff * m
        if cash:
            if gain > 1.0:
                gain = 1.0
            elif gain < -1.0:
                gain = -1.0
        u = gain * v
        if check_support and policy_kind == POLICY_MODULATION:
            head = m + r
            lo = -head / (x_max - r) * v
            hi = head / (-x_min + r) * v
            if u > hi:
                u = hi
                gain = u / v
            elif u < lo:
                u = lo
                gain = u / v
        c = cost_rate * abs(u - carry)
        paid += c
        vp = v - c
        if vp <= 0.0:
            return ERR_NONPOSITIVE, k
        v = vp + u * xk + (vp - u) * r
        carry = u * (1.0 + xk)
        if v <= 0.0:
            return ERR_NONPOSITIVE, k
        if v > peak:
            peak = v
        if v > ep_peak:
            ep_peak = v
        u_out[k] = u
        k_out[k] = gain
        restarted[k] = fired
        geff_out[k] = geff
        v_out[k + 1] = v
        dg_out[k + 1] = (peak - v) / peak
        de_out[k + 1] = (ep_peak - v) / ep_peak
        cost_out[k + 1] = paid
    return ERR_NONE, -1


_backtest_path_jit = _accel.njit(cache=True)(backtest_path_py)


def backtest_path(x, rf, policy_kind, gamma, alpha, d_max, eps, restart, cash,
                  cost_rate, v0, check_support, x_min, x_max, use_numba=None):
    """Run one path; returns ``(status, stage, arrays)``.

    ``arrays`` maps v, u, K, d_global, d_episode, restarted, cost_paid and
    gain_multiplier to per-stage arrays (stage-indexed, length n or n+1).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    rf = np.ascontiguousarray(np.broadcast_to(np.asarray(rf, dtype=np.float64), x.shape))
    n = x.shape[0]
    out = {
        "v": np.full(n + 1, np.nan),
        "u": np.full(n, np.nan),
        "K": np.full(n, np.nan),
        "d_global": np.full(n + 1, np.nan),
        "d_episode": np.full(n + 1, np.nan),
        "restarted": np.zeros(n, dtype=np.bool_),
        "cost_paid": np.full(n + 1, np.nan),
        "gain_multiplier": np.full(n, np.nan),
    }
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    fn = _backtest_path_jit if use_numba else backtest_path_py
    status, stage = fn(
        x, rf, int(policy_kind), float(gamma), float(alpha), float(d_max), float(eps),
        bool(restart), bool(cash), float(cost_rate), float(v0), bool(check_support),
        float(x_min), float(x_max),
        out["v"], out["u"], out["K"], out["d_global"], out["d_episode"],
        out["restarted"], out["cost_paid"], out["gain_multiplier"],
    )
    return int(status), int(stage), out

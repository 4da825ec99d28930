import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcontrol.drawdown import (
    DrawdownError,
    DrawdownSpec,
    DrawdownState,
    account_step,
    feasible_gamma,
    feasible_gamma_for_rates,
    lemma_bounds,
    modulation,
    percentage_drawdown,
    update_state,
)
from ddcontrol.market_data import SupportEstimate

SUP = SupportEstimate(-0.05, 0.05)


def test_percentage_drawdown():
    assert percentage_drawdown(100, 100) == 0
    assert percentage_drawdown(90, 100) == pytest.approx(0.10, rel=1e-15)
    assert percentage_drawdown(65.76, 100) == pytest.approx(0.3424, rel=1e-12)
    with pytest.raises(DrawdownError):
        percentage_drawdown(101, 100)
    with pytest.raises(DrawdownError):
        percentage_drawdown(0, 100)


def test_modulation_examples():
    spec = DrawdownSpec(0.1)
    assert modulation(0.0, spec) == 0.1
    assert modulation(0.1, spec) == 0.0
    assert modulation(0.05, spec) == pytest.approx(0.05 / 0.95, rel=1e-15)
    assert modulation(0.05, spec) == pytest.approx(0.0526315789473684, rel=1e-14)
    # rounding drift just past the limit is clamped
    assert modulation(0.1 + 5e-10, spec) == 0.0
    with pytest.raises(DrawdownError):
        modulation(0.11, spec)
    with pytest.raises(DrawdownError):
        modulation(1.0, spec)


@given(st.floats(0.01, 0.99), st.floats(0, 1), st.floats(0, 1))
def test_modulation_strictly_decreasing(d_max, a, b):
    spec = DrawdownSpec(d_max)
    d1, d2 = sorted((a * d_max, b * d_max))
    assert modulation(d1, spec) >= modulation(d2, spec)
    if d2 - d1 > 1e-9:  # strict once the gap is above float resolution
        assert modulation(d1, spec) > modulation(d2, spec)
    assert 0 <= modulation(d2, spec) <= d_max


def test_spec_domain():
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DrawdownError):
            DrawdownSpec(bad)


def test_lemma_bounds_examples():
    spec = DrawdownSpec(0.1)
    b = lemma_bounds(DrawdownState(100, 100, 0.0), spec, 0.0, SUP)
    assert (b.lower, b.upper) == pytest.approx((-200.0, 200.0), rel=1e-14)
    b = lemma_bounds(DrawdownState(100, 100, 0.0), spec, 0.01, SUP)
    assert b.lower == pytest.approx(-275.0, rel=1e-14)
    assert b.upper == pytest.approx(550 / 3, rel=1e-14)
    v = 90.0
    b = lemma_bounds(DrawdownState(v, 100, (100 - v) / 100), spec, 0.0, SUP)
    assert (b.lower, b.upper) == (0.0, 0.0)
    with pytest.raises(DrawdownError):
        lemma_bounds(DrawdownState(100, 100, 0.0), spec, 0.05, SUP)


def test_account_step():
    assert account_step(1, 0, 0.37, 0) == 1
    assert account_step(100, 50, 0.02, 0) == 101
    assert account_step(100, 50, 0.02, 0.01) == pytest.approx(101.5, rel=1e-15)


def test_update_state():
    s = update_state(DrawdownState(100, 100, 0.0), 110)
    assert (s.v, s.v_max, s.d) == (110, 110, 0.0)
    s = update_state(DrawdownState(100, 100, 0.0), 95)
    assert (s.v, s.v_max) == (95, 100)
    assert s.d == pytest.approx(0.05, rel=1e-15)
    s = update_state(DrawdownState(95, 100, 0.05), 98)
    assert s.d == pytest.approx(0.02, rel=1e-14)
    with pytest.raises(DrawdownError):
        update_state(s, 0.0)


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=30))
def test_update_state_peak_monotone(values):
    s = DrawdownState.start(1.0)
    for v in values:
        nxt = update_state(s, v)
        assert nxt.v_max >= s.v_max
        assert (nxt.d == 0) == (nxt.v == nxt.v_max)
        s = nxt


def test_feasible_gamma():
    g = feasible_gamma(SUP, 0.0)
    assert (g.lo, g.hi) == (-20.0, 20.0)
    g = feasible_gamma(SupportEstimate(-0.04, 0.02), 0.01)
    assert g.lo == pytest.approx(-100.0, rel=1e-12)
    assert g.hi == pytest.approx(20.0, rel=1e-12)
    assert g.lo < 0 < g.hi and 0.0 in g
    with pytest.raises(DrawdownError):
        feasible_gamma(SUP, 0.05)


def test_feasible_gamma_round_trip_from_endpoints():
    # a support backed out of the interval (-30.79, 34.9) gives it back
    rate = 0.01 / 365
    x_max = 1 / 30.79 + rate
    x_min = -(1 / 34.9 - rate)
    g = feasible_gamma(SupportEstimate(x_min, x_max), rate)
    assert g.lo == pytest.approx(-30.79, rel=1e-12)
    assert g.hi == pytest.approx(34.9, rel=1e-12)


# --- sufficiency of the admissible interval --------------------------------

@settings(max_examples=300, deadline=None)
@given(
    d_max=st.floats(0.01, 0.9),
    d_frac=st.floats(0, 1),
    x_min=st.floats(-0.5, -1e-3),
    x_max=st.floats(1e-3, 0.5),
    r_frac=st.floats(0, 0.99),
    u_frac=st.floats(0, 1),
    x_frac=st.floats(0, 1),
)
def test_admissible_position_keeps_drawdown(d_max, d_frac, x_min, x_max, r_frac, u_frac, x_frac):
    spec = DrawdownSpec(d_max)
    sup = SupportEstimate(x_min, x_max)
    r = r_frac * x_max
    v_max = 1.0
    v = v_max * (1 - d_frac * d_max)
    state = DrawdownState(v, v_max, (v_max - v) / v_max)
    b = lemma_bounds(state, spec, r, sup)
    u = b.lower + u_frac * (b.upper - b.lower)
    x = x_min + x_frac * (x_max - x_min)
    nxt = update_state(state, account_step(v, u, x, r))
    assert nxt.d <= d_max + 1e-12


@settings(max_examples=300, deadline=None)
@given(
    d_max=st.floats(0.01, 0.9),
    d_frac=st.floats(0, 0.999),
    x_min=st.floats(-0.5, -1e-3),
    x_max=st.floats(1e-3, 0.5),
    r_frac=st.floats(0, 0.99),
)
def test_worst_case_is_sharp(d_max, d_frac, x_min, x_max, r_frac):
    spec = DrawdownSpec(d_max)
    sup = SupportEstimate(x_min, x_max)
    r = r_frac * x_max
    v = 1 - d_frac * d_max
    state = DrawdownState(v, 1.0, 1.0 - v)
    b = lemma_bounds(state, spec, r, sup)
    up = update_state(state, account_step(v, b.upper, x_min, r))
    assert up.d == pytest.approx(d_max, abs=1e-12)
    if b.lower < 0:
        down = update_state(state, account_step(v, b.lower, x_max, r))
        assert down.d == pytest.approx(d_max, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    d_max=st.floats(0.01, 0.9),
    x_min=st.floats(-0.5, -1e-3),
    x_max=st.floats(1e-3, 0.5),
    r_hi=st.floats(0, 0.99),
    r_lo_frac=st.floats(0, 1),
)
def test_gamma_endpoints_respect_bounds(d_max, x_min, x_max, r_hi, r_lo_frac):
    spec = DrawdownSpec(d_max)
    sup = SupportEstimate(x_min, x_max)
    r_max = r_hi * x_max
    r_min = r_lo_frac * r_max
    g = feasible_gamma_for_rates(sup, [r_min, r_max])
    for d in np.linspace(0, d_max, 11):
        v = 1 - d
        state = DrawdownState(v, 1.0, 1.0 - v)
        m = modulation(state.d, spec)
        for r in np.linspace(r_min, r_max, 5):
            b = lemma_bounds(state, spec, r, sup)
            for gamma in (g.lo, g.hi):
                assert b.contains(gamma * m * v)


def test_constant_rate_lower_end_unsafe_when_rates_vary():
    # Sizing the short side with the largest rate overshoots on a
    # zero-rate stage; the rate-range form does not.
    sup = SupportEstimate(-0.06, 0.06)
    spec = DrawdownSpec(0.1)
    literal = feasible_gamma(sup, 0.0005)
    state = DrawdownState.start(1.0)
    b = lemma_bounds(state, spec, 0.0, sup)
    assert not b.contains(literal.lo * modulation(0.0, spec))
    safe = feasible_gamma_for_rates(sup, [0.0, 0.0005])
    assert b.contains(safe.lo * modulation(0.0, spec))
    v1 = account_step(1.0, literal.lo * 0.1, sup.x_max, 0.0)
    assert (1.0 - v1) > spec.d_max
    assert math.isclose(safe.lo, -1 / 0.06)

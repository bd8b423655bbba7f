"""Front tracking, speed estimation, and the traveling/pulsating
classifier, exercised on synthetic profiles with known answers."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kswave.cauchy import CauchyState
from kswave.core import Field, grid_make
from kswave.elliptic import solve_v
from kswave.errors import ConfigError
from kswave.fronts import (detect_period, front_position,
                           speed_from_positions)


def _front_profile(x, pos, width=1.0):
    """Smooth monotone front: 1 on the left, 0 on the right, centered at pos."""
    return 0.5 * (1.0 - np.tanh((x - pos) / width))


def _snap(grid, t, values):
    u = Field(grid, np.asarray(values, dtype=float))
    return CauchyState(t, u, solve_v(u, 1.0))


class TestFrontPosition:
    def test_linear_ramp_exact(self):
        # u = 1 - x/20 crosses 0.475 at x = 10.5 exactly
        g = grid_make(0.0, 20.0, 201)
        u = Field.from_function(g, lambda x: 1.0 - x / 20.0)
        assert front_position(u, 0.475) == pytest.approx(10.5, abs=1e-12)

    def test_no_crossing_returns_none(self):
        g = grid_make(0.0, 20.0, 201)
        assert front_position(Field.constant(g, 0.3), 0.5) is None

    def test_rightmost_crossing_wins(self):
        # two fronts: tracking must lock on the rightmost one
        g = grid_make(0.0, 40.0, 401)
        u = Field.from_function(
            g, lambda x: _front_profile(x, 10.0) + _front_profile(x, 30.0))
        pos = front_position(u, 0.5)
        assert abs(pos - 30.0) < 0.1

    def test_level_out_of_range_rejected(self):
        g = grid_make(0.0, 20.0, 201)
        u = Field.constant(g, 0.7)
        for level in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ConfigError):
                front_position(u, level)


class TestSpeed:
    def test_endpoint_difference_example(self):
        est = speed_from_positions([(10.0, 25.45), (30.0, 63.53)])
        assert est.speed == pytest.approx(1.904, abs=1e-12)
        assert est.method == "endpoint_difference"

    def test_second_example(self):
        est = speed_from_positions([(10.0, 23.85), (30.0, 61.72)])
        assert est.speed == pytest.approx(1.8935, abs=1e-12)

    def test_least_squares_on_exact_line(self):
        pts = [(t, 3.0 + 1.9 * t) for t in range(0, 20, 2)]
        est = speed_from_positions(pts, method="least_squares")
        assert est.speed == pytest.approx(1.9, abs=1e-9)

    def test_none_positions_dropped(self):
        est = speed_from_positions([(0.0, None), (10.0, 20.0), (20.0, 39.0)])
        assert est.speed == pytest.approx(1.9)
        assert len(est.positions) == 2

    def test_too_few_points_rejected(self):
        with pytest.raises(ConfigError):
            speed_from_positions([(0.0, 1.0), (1.0, None)])

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            speed_from_positions([(0.0, 1.0), (1.0, 2.0)], method="spline")


class TestDetectPeriod:
    GRID = grid_make(0.0, 160.0, 801)

    def _translating(self, speed, times, wobble=0.0, period=3.0):
        snaps = []
        for t in times:
            amp = 1.0 + wobble * math.sin(2.0 * math.pi * t / period)
            vals = amp * _front_profile(self.GRID.nodes, 40.0 + speed * t)
            snaps.append(_snap(self.GRID, t, vals))
        return snaps

    def test_exact_translate_is_traveling(self):
        times = [float(t) for t in range(0, 15)]
        est = detect_period(self._translating(1.9, times), 1.9)
        assert est.classification == "traveling_wave"
        assert est.period is None
        assert est.mismatch < 1e-3

    def test_constant_shift_invariance(self):
        # adding the same x-offset to every snapshot must not matter
        times = [float(t) for t in range(0, 15)]
        a = detect_period(self._translating(1.9, times), 1.9)
        snaps = []
        for t in times:
            vals = _front_profile(self.GRID.nodes, 45.0 + 1.9 * t)
            snaps.append(_snap(self.GRID, t, vals))
        b = detect_period(snaps, 1.9)
        assert b.classification == a.classification == "traveling_wave"

    def test_modulated_front_period_recovered(self):
        # amplitude breathing with period 3 on top of a steady translation
        times = [float(t) for t in range(0, 15)]
        est = detect_period(self._translating(1.9, times, wobble=0.1), 1.9)
        assert est.classification == "pulsating_front"
        assert est.period == pytest.approx(3.0, abs=1e-9)
        assert est.mismatch <= 1e-6

    def test_exact_shifted_copies_mismatch_tiny(self):
        # snapshots built by node-exact shifting: mismatch at the true
        # period is pure interpolation error
        g = grid_make(0.0, 160.0, 1601)
        base = _front_profile(g.nodes, 60.0)
        snaps = []
        c, dt = 2.0, 1.0
        for k in range(12):
            shift_nodes = int(round(c * dt * k / g.dx))
            vals = np.roll(base, shift_nodes)
            vals[:shift_nodes] = 1.0
            snaps.append(_snap(g, k * dt, vals))
        est = detect_period(snaps, c)
        assert est.classification == "traveling_wave"
        assert est.mismatch <= 1e-12

    def test_time_reversal_same_period(self):
        times = [float(t) for t in range(0, 15)]
        snaps = self._translating(1.9, times, wobble=0.1)
        fwd = detect_period(snaps, 1.9)
        rev = [CauchyState(14.0 - s.t, s.u, s.v) for s in snaps]
        # reversed labels walk the pattern backwards; the cycle length is
        # unchanged but the frame speed flips sign
        bwd = detect_period(rev, -1.9)
        assert bwd.classification == "pulsating_front"
        assert bwd.period == pytest.approx(fwd.period)

    def test_rejects_nonuniform_times(self):
        snaps = self._translating(1.9, [0.0, 1.0, 2.5])
        with pytest.raises(ConfigError):
            detect_period(snaps, 1.9)

    def test_rejects_too_few_snapshots(self):
        snaps = self._translating(1.9, [0.0, 1.0])
        with pytest.raises(ConfigError):
            detect_period(snaps, 1.9)

    def test_rejects_empty_window(self):
        snaps = self._translating(1.9, [0.0, 1.0, 2.0, 3.0, 4.0])
        with pytest.raises(ConfigError):
            detect_period(snaps, 1.9, window=(500.0, 510.0))

    @given(offset=st.floats(-5.0, 5.0))
    @settings(max_examples=10, deadline=None)
    def test_speed_offset_breaks_traveling_verdict(self, offset):
        # in a frame moving at the wrong speed the front itself never looks
        # time-independent (unless the offset is negligible); the window
        # must straddle the front since this wake is flat
        times = [float(t) for t in range(0, 15)]
        snaps = self._translating(1.9, times)
        est = detect_period(snaps, 1.9 + offset, window=(35.0, 45.0))
        if abs(offset) > 0.1:
            assert est.classification != "traveling_wave"

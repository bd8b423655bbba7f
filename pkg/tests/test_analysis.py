"""Linear stability of the invaded state: the dispersion relation, the
threshold chi_star, measured growth rates, and the inequality report."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kswave.analysis import (bound_report, chi_star, dispersion,
                             measure_growth_rate, stability_report)
from kswave.core import Field, Params, grid_make
from kswave.errors import ConfigError


class TestDispersion:
    def test_k_zero_is_pure_reaction(self):
        # the k = 0 mode feels only the linearized logistic term
        assert dispersion(0.0, Params(7.0, 2.0)) == pytest.approx(-1.0)

    def test_neutral_case_touches_zero_at_k_one(self):
        # chi = 4, d = 1 sits exactly at threshold: lambda(1) = 0
        assert dispersion(1.0, Params(4.0, 1.0)) == pytest.approx(0.0, abs=1e-14)

    def test_negative_below_threshold(self):
        assert dispersion(1.0, Params(3.0, 1.0)) == pytest.approx(-0.5)

    def test_vectorized(self):
        k = np.array([0.0, 0.5, 1.0, 2.0])
        out = dispersion(k, Params(4.0, 1.0))
        assert out.shape == k.shape
        assert out[0] == pytest.approx(-1.0)

    @given(k=st.floats(0.0, 10.0), chi=st.floats(-5.0, 10.0),
           d=st.floats(0.1, 5.0))
    @settings(max_examples=50, deadline=None)
    def test_never_exceeds_closed_form_max(self, k, chi, d):
        rep = stability_report(Params(chi, d))
        assert dispersion(k, Params(chi, d)) <= rep.lambda_max + 1e-12


class TestChiStar:
    @pytest.mark.parametrize("d,expected", [
        (1.0, 4.0),
        (0.25, 2.25),
        (4.0, 9.0),
    ])
    def test_values(self, d, expected):
        assert chi_star(d) == pytest.approx(expected)


class TestStabilityReport:
    def test_below_threshold_stable(self):
        rep = stability_report(Params(3.0, 1.0))
        assert rep.verdict == "stable"
        assert rep.lambda_max < 0.0

    def test_at_threshold_neutral(self):
        rep = stability_report(Params(4.0, 1.0))
        assert rep.verdict == "neutral"
        assert rep.lambda_max == pytest.approx(0.0, abs=1e-12)
        assert rep.k_star == pytest.approx(1.0)

    def test_above_threshold_unstable(self):
        rep = stability_report(Params(5.0, 1.0))
        assert rep.verdict == "unstable"
        # (sqrt(5) - 1)^2 - 1 = 5 - 2 sqrt(5)
        assert rep.lambda_max == pytest.approx(5.0 - 2.0 * math.sqrt(5.0))
        assert rep.chi_star == pytest.approx(4.0)

    def test_chi_below_one_max_at_k_zero(self):
        rep = stability_report(Params(0.5, 1.0))
        assert rep.k_star == 0.0
        assert rep.lambda_max == pytest.approx(-1.0)


class TestMeasuredGrowth:
    @pytest.mark.parametrize("chi,d,k", [
        (5.0, 1.0, 1.0),
        (0.0, 1.0, 1.0),
        (3.0, 1.0, 1.0),
    ])
    def test_stepper_matches_dispersion(self, chi, d, k):
        predicted = dispersion(k, Params(chi, d))
        measured = measure_growth_rate(Params(chi, d), k)
        assert measured == pytest.approx(predicted, abs=0.1 * abs(predicted))

    def test_rejects_nonpositive_k(self):
        with pytest.raises(ConfigError):
            measure_growth_rate(Params(5.0, 1.0), 0.0)


class TestBoundReport:
    def _wave(self, chi=0.5, d=1.0):
        from kswave.elliptic import solve_v
        from kswave.kernel import SLAB_EXTENSION
        g = grid_make(-40.0, 40.0, 801)
        U = Field.from_function(g, lambda x: np.minimum(1.0, np.exp(-x)))
        V = solve_v(U, d)
        return 2.0, U, V, Params(chi, d)

    def test_entries_present_and_passing(self):
        c, U, V, params = self._wave()
        rep = bound_report(c, U, V, params)
        names = [chk.name for chk in rep.checks]
        assert names == ["signal_gradient", "speed_upper", "speed_lower",
                         "ul_constant"]
        assert rep.n_failures == 0
        assert not rep.entry("ul_constant").asserted
        assert rep.entry("ul_constant").value > 0.0

    def test_speed_upper_fails_for_absurd_speed(self):
        _c, U, V, params = self._wave()
        rep = bound_report(100.0, U, V, params)
        assert not rep.entry("speed_upper").passed
        assert rep.n_failures == 1

    def test_speed_lower_fails_for_slow_wave(self):
        _c, U, V, params = self._wave()
        rep = bound_report(1.0, U, V, params)
        assert not rep.entry("speed_lower").passed

    def test_negative_profile_rejected(self):
        g = grid_make(-10.0, 10.0, 101)
        U = Field.constant(g, -1.0)
        with pytest.raises(ConfigError):
            bound_report(2.0, U, U, Params(1.0, 1.0))

    def test_as_dicts_round_trip(self):
        c, U, V, params = self._wave()
        rows = bound_report(c, U, V, params).as_dicts()
        assert all(set(r) >= {"name", "value", "bound", "passed"} for r in rows)

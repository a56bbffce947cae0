"""Unit tests for limit detection."""

import math

import numpy as np
import pytest

from src.defsum.convergence import (ConvergenceVerdict, DetectParams, Outcome, VerdictStatus,
                                    detect_limit, limit_outcome, materialize, null_outcome,
                                    still_falling)
from src.defsum.errors import EmptyStreamError
from src.defsum.sequences import constant, harmonic_power


class TestDetectLimit:
    """Tests for detect_limit verdicts."""

    def test_constant_stream_converges(self):
        """Test that a constant stream converges to its value."""
        verdict = detect_limit([2.5] * 100, horizon=100)
        assert verdict.status is VerdictStatus.CONVERGED
        assert verdict.limit == 2.5
        assert verdict.residual == 0.0

    def test_trace_covers_horizon(self):
        """Test that the trace holds (n, value) for n = 1..horizon."""
        verdict = detect_limit(lambda n: 1.0 / n, tol=1e-2, horizon=50)
        assert len(verdict.trace) == 50
        assert verdict.trace[0] == (1, 1.0)
        assert verdict.trace[-1] == (50, 1.0 / 50)

    def test_one_over_n_converges_to_zero(self):
        """Test 1/n at horizon 10^4 with tol 1e-3."""
        verdict = detect_limit(lambda n: 1.0 / n, tol=1e-3, horizon=10_000)
        assert verdict.converged
        assert abs(verdict.limit) < 1e-3

    def test_growth_diverges(self):
        """Test that a stream above the divergence bound diverges."""
        verdict = detect_limit(lambda n: float(n) ** 4, horizon=1000, divergence_bound=1e9)
        assert verdict.status is VerdictStatus.DIVERGED
        assert verdict.limit is None

    def test_oscillation_diverges(self):
        """Test that (-1)^n is reported as diverged, not inconclusive."""
        verdict = detect_limit(lambda n: (-1.0) ** n, tol=1e-3, horizon=1000)
        assert verdict.status is VerdictStatus.DIVERGED
        assert "oscillation not shrinking" in verdict.notes

    def test_non_finite_values_diverge(self):
        """Test that inf in the final window diverges."""
        values = [1.0] * 20 + [math.inf]
        verdict = detect_limit(values, window=4, horizon=21)
        assert verdict.status is VerdictStatus.DIVERGED

    def test_slow_convergence_is_inconclusive(self):
        """Test 1/log(n): shrinking spread above tol is inconclusive."""
        verdict = detect_limit(lambda n: 1.0 / math.log(n + 1), tol=1e-8, horizon=1000)
        assert verdict.status is VerdictStatus.INCONCLUSIVE

    def test_empty_stream_raises(self):
        """Test that an empty stream raises EmptyStreamError."""
        with pytest.raises(EmptyStreamError):
            detect_limit([], window=2, horizon=10)

    def test_short_stream_raises(self):
        """Test that a stream shorter than the window raises ValueError."""
        with pytest.raises(ValueError):
            detect_limit([1.0, 2.0], window=4, horizon=10)

    def test_bad_window_raises(self):
        """Test window < 2 is rejected."""
        with pytest.raises(ValueError):
            detect_limit([1.0] * 10, window=1, horizon=10)

    def test_complex_stream(self):
        """Test complex values converge to a complex limit."""
        verdict = detect_limit(lambda n: 1j + 1.0 / n ** 2, tol=1e-6, horizon=2000)
        assert verdict.converged
        assert abs(verdict.limit - 1j) < 1e-6

    def test_accepts_seq(self):
        """Test that a Seq is materialized through its block."""
        verdict = detect_limit(harmonic_power(1.0), tol=1e-3, horizon=10_000)
        assert verdict.converged


class TestMaterialize:
    """Tests for materialize."""

    def test_seq_values(self):
        """Test Seq input."""
        np.testing.assert_array_equal(materialize(constant(3.0), 4), [3.0] * 4)

    def test_callable(self):
        """Test callable input is evaluated from n = 1."""
        np.testing.assert_array_equal(materialize(lambda n: n, 3), [1, 2, 3])

    def test_array_truncated(self):
        """Test arrays are cut to the horizon."""
        assert materialize(np.arange(10), 4).tolist() == [0, 1, 2, 3]


class TestDetectParams:
    """Tests for detection presets."""

    def test_membership_preset(self):
        """Test the membership preset thresholds."""
        params = DetectParams.for_membership()
        assert (params.tol, params.window, params.horizon) == (1e-3, 16, 10_000)

    def test_criteria_preset_with_override(self):
        """Test the criterion preset and keyword overrides."""
        params = DetectParams.for_criteria(horizon=50)
        assert (params.tol, params.window, params.horizon) == (1e-2, 16, 50)

    def test_oscillation_floor(self):
        """Test the floor is factor * tol."""
        assert DetectParams(tol=1e-3).oscillation_floor == pytest.approx(1.0)


class TestOutcomes:
    """Tests for verdict to outcome mappings."""

    def _verdict(self, status, limit=None):
        return ConvergenceVerdict(status, limit, 0.0, (), 1e-2)

    def test_limit_outcome(self):
        """Test limit_outcome maps each status."""
        assert limit_outcome(self._verdict(VerdictStatus.CONVERGED, 5.0)) is Outcome.HOLDS
        assert limit_outcome(self._verdict(VerdictStatus.DIVERGED)) is Outcome.FAILS
        assert limit_outcome(self._verdict(VerdictStatus.INCONCLUSIVE)) is Outcome.INCONCLUSIVE

    def test_null_outcome_requires_small_limit(self):
        """Test that a converged nonzero trace fails the null test."""
        assert null_outcome(self._verdict(VerdictStatus.CONVERGED, 0.001)) is Outcome.HOLDS
        assert null_outcome(self._verdict(VerdictStatus.CONVERGED, 1.0)) is Outcome.FAILS

    @staticmethod
    def _trace_verdict(term, horizon=200):
        trace = tuple((n, term(n)) for n in range(1, horizon + 1))
        return ConvergenceVerdict(VerdictStatus.CONVERGED, trace[-1][1], 0.0, trace, 1e-2)

    def test_slowly_decaying_trace_is_inconclusive(self):
        """Test T_n = 2/n, still above tol at the horizon, does not fail."""
        verdict = self._trace_verdict(lambda n: 2.0 / n)
        assert still_falling(verdict)
        assert null_outcome(verdict, 1e-2, 16) is Outcome.INCONCLUSIVE

    def test_trace_settling_above_zero_fails(self):
        """Test T_n = 1 + 1/n decreases but toward 1, so it fails."""
        verdict = self._trace_verdict(lambda n: 1.0 + 1.0 / n)
        assert not still_falling(verdict)
        assert null_outcome(verdict, 1e-2, 16) is Outcome.FAILS

    def test_short_trace_is_not_falling(self):
        """Test fewer than two windows of values give no decay evidence."""
        verdict = self._trace_verdict(lambda n: 1.0 / n, horizon=20)
        assert not still_falling(verdict, window=16)

    def test_with_notes_appends(self):
        """Test with_notes keeps existing notes."""
        verdict = self._verdict(VerdictStatus.CONVERGED, 0.0).with_notes("a").with_notes("b")
        assert verdict.notes == ("a", "b")

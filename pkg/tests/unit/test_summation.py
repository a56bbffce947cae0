"""Unit tests for compensated summation."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from src.defsum.summation import PrefixSums, compensated_sum


class TestCompensatedSum:
    """Tests for compensated_sum."""

    def test_empty_is_zero(self):
        """Test that an empty input sums to 0."""
        assert compensated_sum([]) == 0.0

    def test_cancellation_is_exact(self):
        """Test that large cancelling terms do not swallow small ones."""
        assert compensated_sum([1e16, 1.0, -1e16]) == 1.0

    def test_complex_values(self):
        """Test that real and imaginary parts are summed separately."""
        assert compensated_sum([1 + 2j, 3 - 1j]) == 4 + 1j

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6), max_size=50))
    def test_matches_fsum(self, values):
        """Test agreement with math.fsum on arbitrary real lists."""
        assert compensated_sum(values) == math.fsum(values)


class TestPrefixSums:
    """Tests for PrefixSums windows."""

    def setup_method(self):
        """Set up test fixtures."""
        self.values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        self.sums = PrefixSums(self.values)

    def test_prefix_zero_is_zero(self):
        """Test that P_0 = 0."""
        assert self.sums.prefix(0) == 0.0

    def test_prefix_values(self):
        """Test P_k at a vector of indices."""
        np.testing.assert_array_equal(self.sums.prefix(np.array([1, 3, 5])), [1.0, 6.0, 15.0])

    def test_window_inclusive(self):
        """Test that window(lo, hi) includes both ends."""
        assert self.sums.window(2, 4) == 9.0

    def test_empty_window_is_zero(self):
        """Test that hi < lo gives 0."""
        assert self.sums.window(4, 3) == 0.0

    def test_window_clipped_to_length(self):
        """Test that windows past the end only count stored values."""
        assert self.sums.window(4, 100) == 9.0

    def test_vectorized_windows(self):
        """Test many windows at once."""
        out = self.sums.window(np.array([1, 2, 5]), np.array([5, 2, 4]))
        np.testing.assert_array_equal(out, [15.0, 2.0, 0.0])

    def test_complex_windows(self):
        """Test complex input keeps its imaginary part."""
        sums = PrefixSums(np.array([1j, 2.0, 3 - 1j]))
        assert sums.is_complex is True
        assert sums.window(1, 3) == 5.0 + 0j

    def test_long_alternating_window_accuracy(self):
        """Test a long window of cancelling terms stays accurate."""
        values = np.tile([1e8, 1.0, -1e8], 10_000)
        sums = PrefixSums(values)
        assert sums.window(1, values.size) == 10_000.0

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=1, max_size=40),
           st.data())
    def test_window_matches_fsum(self, values, data):
        """Test window sums agree with fsum over the same slice."""
        lo = data.draw(st.integers(min_value=1, max_value=len(values)))
        hi = data.draw(st.integers(min_value=lo, max_value=len(values)))
        got = PrefixSums(np.array(values)).window(lo, hi)
        assert math.isclose(got, math.fsum(values[lo - 1:hi]), rel_tol=1e-12, abs_tol=1e-9)

"""Unit tests for sequences, schedules and deferred means."""

import inspect

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.defsum.errors import ScheduleError
from src.defsum.sequences import (DefermentSchedule, Seq, Tail, TailKind, alternating, backward_diff,
                                  block_schedule, cesaro_mean, cesaro_schedule, constant,
                                  deferred_mean, deferred_wedge_elem, forward_sum, from_table,
                                  geometric, harmonic_power, ones, partial_sums, periodic,
                                  poly_schedule, random_decay, section, section_ones,
                                  sliding_schedule, table_schedule, unit, window_sums, zeta)

finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


class TestDocumentation:
    """Tests that the sequence building blocks document their public methods."""

    @pytest.mark.parametrize("cls", [Tail, Seq, DefermentSchedule], ids=["Tail", "Seq", "DefermentSchedule"])
    def test_methods_have_docstrings(self, cls):
        """Test every public method and operator defined on the class has a docstring."""
        operators = {"__add__", "__sub__", "__neg__", "__mul__", "__rmul__"}
        missing = []
        for name, member in vars(cls).items():
            if name.startswith("_") and name not in operators:
                continue
            func = getattr(member, "__func__", None) or getattr(member, "fget", None) or member
            if callable(func) and not inspect.getdoc(func):
                missing.append(name)
        assert missing == []


class TestTail:
    """Tests for tail descriptors."""

    def test_zero_times_anything_is_zero(self):
        """Test an eventually-zero factor makes the product eventually zero."""
        tail = Tail.zero(5).times(Tail.unknown())
        assert tail.kind is TailKind.EVENTUALLY_ZERO
        assert tail.start == 5

    def test_constants_add(self):
        """Test two constant tails add from the later start."""
        tail = Tail.constant(3, 1.0).plus(Tail.constant(7, 2.0))
        assert tail.kind is TailKind.EVENTUALLY_CONSTANT
        assert (tail.start, tail.value) == (7, 3.0)

    def test_geometric_ratio_checked(self):
        """Test a ratio of 1 is rejected."""
        with pytest.raises(ValueError):
            Tail.geometric(1, 1.0, 1.0)

    def test_bound_after(self):
        """Test bound_after for geometric and unknown tails."""
        assert Tail.geometric(1, 0.5, 2.0).bound_after(3) == pytest.approx(2.0 * 0.5 ** 4)
        assert Tail.unknown().bound_after(3) is None
        assert Tail.zero(10).bound_after(3) is None

    def test_constant_scaled(self):
        """Test scaling a constant tail scales its value."""
        assert Tail.constant(2, 3.0).scaled(2.0).value == 6.0


class TestSeq:
    """Tests for Seq and its constructors."""

    def test_index_below_one_raises(self):
        """Test 1-based indexing."""
        with pytest.raises(IndexError):
            ones().at(0)

    def test_values_empty_range(self):
        """Test hi < lo gives an empty array."""
        assert ones().values(5, 4).size == 0

    def test_unit_vector(self):
        """Test delta^3."""
        np.testing.assert_array_equal(unit(3).values(1, 5), [0, 0, 1, 0, 0])
        assert unit(3).tail == Tail.zero(4)

    def test_unit_index_checked(self):
        """Test delta^0 is rejected."""
        with pytest.raises(ValueError):
            unit(0)

    def test_section_ones(self):
        """Test e^(2)."""
        np.testing.assert_array_equal(section_ones(2).values(1, 4), [1, 1, 0, 0])

    def test_section_of_sequence(self):
        """Test x^(k) keeps the first k coordinates only."""
        x = from_table([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(section(x, 2).values(1, 5), [1, 2, 0, 0, 0])

    def test_table_window_sum(self):
        """Test table window sums stop at the table end."""
        x = from_table([1.0, 2.0, 3.0])
        assert x.window_sum(2, 10) == 5.0
        assert x.at(9) == 0.0

    def test_alternating(self):
        """Test 1, -1, 1, ... and its closed-form window sums."""
        x = alternating()
        np.testing.assert_array_equal(x.values(1, 4), [1, -1, 1, -1])
        assert x.window_sum(1, 7) == 1.0
        assert x.window_sum(2, 7) == 0.0

    def test_periodic_window_sum_matches_values(self):
        """Test the periodic closed form against direct summation."""
        x = periodic([1.0, 2.0, -4.0])
        assert x.window_sum(3, 20) == pytest.approx(x.values(3, 20).sum())

    def test_geometric_ratio_checked(self):
        """Test |r| >= 1 is rejected."""
        with pytest.raises(ValueError):
            geometric(1.0, 1.0)

    def test_geometric_window_sum(self):
        """Test the geometric closed form."""
        x = geometric(2.0, 0.5, 1.0)
        assert x.window_sum(1, 30) == pytest.approx(x.values(1, 30).sum(), rel=1e-12)

    def test_random_decay_is_reproducible(self):
        """Test random(seed) gives the same coordinates every time."""
        a, b = random_decay(7, 0.9), random_decay(7, 0.9)
        np.testing.assert_array_equal(a.values(1, 20), b.values(1, 20))
        assert a.check_tail(range(1, 50))

    def test_random_decay_checks_decay(self):
        """Test decay outside [0, 1) is rejected."""
        with pytest.raises(ValueError):
            random_decay(0, 1.5)

    def test_arithmetic(self):
        """Test +, - and scalar * on sequences."""
        x = from_table([1.0, 2.0])
        y = constant(1.0)
        np.testing.assert_array_equal((x + y).values(1, 3), [2, 3, 1])
        np.testing.assert_array_equal((2.0 * x - y).values(1, 3), [1, 3, -1])
        np.testing.assert_array_equal((x * y).values(1, 3), [1, 2, 0])


class TestSchedules:
    """Tests for deferment schedules."""

    def test_cesaro_window(self):
        """Test p = 0, q = n."""
        assert cesaro_schedule().window(7) == (0, 7)

    def test_block_window(self):
        """Test p = n, q = 2n."""
        assert block_schedule().window(7) == (7, 14)

    def test_poly_window(self):
        """Test p = n^a, q = n^b + 1."""
        assert poly_schedule(1, 2).window(3) == (3, 10)

    def test_poly_requires_b_at_least_a(self):
        """Test b < a is rejected."""
        with pytest.raises(ValueError):
            poly_schedule(2, 1)

    def test_sliding_length(self):
        """Test fixed window length."""
        assert sliding_schedule(3).length(10) == 3

    def test_equal_ends_raise_schedule_error(self):
        """Test p(n) = q(n) raises ScheduleError naming n."""
        d = DefermentSchedule(lambda n: n, lambda n: n)
        with pytest.raises(ScheduleError) as info:
            d.window(4)
        assert info.value.n == 4

    def test_negative_p_raises(self):
        """Test p(n) < 0 raises ScheduleError."""
        d = DefermentSchedule(lambda n: -1, lambda n: n)
        with pytest.raises(ScheduleError):
            d.window(1)

    def test_bounds_validate(self):
        """Test vector bounds report the first bad n."""
        d = DefermentSchedule(lambda n: 0 if n < 5 else n, lambda n: n)
        with pytest.raises(ScheduleError) as info:
            d.bounds(1, 10)
        assert info.value.n == 5

    def test_bounded_q_fails_validation(self):
        """Test a schedule whose q stops growing is rejected."""
        d = DefermentSchedule(lambda n: 0, lambda n: min(n, 10), horizon=100)
        with pytest.raises(ScheduleError):
            d.validate()

    def test_table_schedule_continuation(self):
        """Test both ends advance by one past the table."""
        d = table_schedule([0, 1], [1, 3])
        assert d.window(2) == (1, 3)
        assert d.window(5) == (4, 6)

    def test_table_schedule_lengths_checked(self):
        """Test mismatched p and q lists are rejected."""
        with pytest.raises(ValueError):
            table_schedule([0, 1], [1])

    def test_agnew_ratio(self):
        """Test the p/(q-p) bound for block and sliding schedules."""
        assert block_schedule().agnew_ratio_bound(100) == (1.0, True)
        _, bounded = sliding_schedule(1).agnew_ratio_bound(100)
        assert bounded is False

    def test_shifted(self):
        """Test the shifted schedule moves both ends."""
        assert cesaro_schedule().shifted(1).window(5) == (1, 6)

    def test_describe(self):
        """Test parameterised schedules describe their parameters."""
        assert poly_schedule(1, 2).describe() == "poly(a=1,b=2)"


class TestDeferredMean:
    """Tests for deferred means and window sums."""

    def test_cesaro_mean_of_alternating(self):
        """Test the Cesaro means of 1, -1, 1, ... are 1/n for odd n and 0 for even n."""
        means = cesaro_mean(alternating()).values(1, 6)
        np.testing.assert_allclose(means, [1, 0, 1 / 3, 0, 1 / 5, 0])

    def test_reduction_to_cesaro(self):
        """Test p = 0, q = n against the running average."""
        x = random_decay(3, 0.99)
        raw = x.values(1, 500)
        expected = np.cumsum(raw) / np.arange(1, 501)
        np.testing.assert_allclose(deferred_mean(x, cesaro_schedule()).values(1, 500), expected,
                                   rtol=1e-10, atol=1e-12)

    def test_deferred_mean_equals_cesaro_mean(self):
        """Test deferred_mean with the Cesaro schedule is cesaro_mean exactly."""
        x = random_decay(11, 0.9)
        np.testing.assert_array_equal(deferred_mean(x, cesaro_schedule()).values(1, 300),
                                      cesaro_mean(x).values(1, 300))

    def test_block_mean_of_constant(self):
        """Test the deferred mean of c*e is c."""
        np.testing.assert_allclose(deferred_mean(constant(2.5), block_schedule()).values(1, 50), 2.5)

    def test_rule_matches_block(self):
        """Test scalar and vector evaluation paths agree."""
        y = deferred_mean(harmonic_power(1.5), poly_schedule(1, 2))
        np.testing.assert_allclose([y.at(n) for n in range(1, 30)], y.values(1, 29), rtol=1e-12)

    def test_window_sums_eventual_tail(self):
        """Test windows reaching into an eventually constant tail."""
        x = partial_sums(from_table([1.0, 2.0]))
        np.testing.assert_allclose(window_sums(x, [1, 2, 5], [3, 10, 4]), [7.0, 27.0, 0.0])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(finite, min_size=1, max_size=20), st.lists(finite, min_size=1, max_size=20),
           finite, finite)
    def test_linearity(self, xs, ys, a, b):
        """Test D(ax + by) = a Dx + b Dy."""
        x, y = from_table(xs), from_table(ys)
        d = block_schedule()
        left = deferred_mean(a * x + b * y, d).values(1, 30)
        right = a * deferred_mean(x, d).values(1, 30) + b * deferred_mean(y, d).values(1, 30)
        np.testing.assert_allclose(left, right, rtol=1e-9, atol=1e-9)


class TestZetaAndWedge:
    """Tests for zeta^n, the wedge block and the S/S^-1 maps."""

    def test_zeta_coordinates(self):
        """Test p = 2, q = 6 gives 0, 0, 0, 1/4, 1/2, 3/4, 1, 1."""
        d = table_schedule([2], [6])
        np.testing.assert_array_equal(zeta(d, 1).values(1, 8),
                                      [0, 0, 0, 0.25, 0.5, 0.75, 1.0, 1.0])

    def test_zeta_tail(self):
        """Test zeta^n is 1 from q(n)+1 on."""
        assert zeta(cesaro_schedule(), 10).tail == Tail.constant(11, 1.0)

    def test_zeta_window_sum(self):
        """Test the ramp closed form against direct summation."""
        z = zeta(block_schedule(), 6)
        assert z.window_sum(3, 40) == pytest.approx(z.values(3, 40).sum(), rel=1e-14)

    def test_wedge_block(self):
        """Test the wedge element is 1/m on p+1..q."""
        w = deferred_wedge_elem(block_schedule(), 2)
        np.testing.assert_array_equal(w.values(1, 6), [0, 0, 0.5, 0.5, 0, 0])

    def test_round_trip(self):
        """Test S^-1 S x = x and S S^-1 x = x on a table."""
        x = from_table([1.0, -2.0, 0.5, 4.0])
        np.testing.assert_allclose(backward_diff(forward_sum(x)).values(1, 8), x.values(1, 8))
        np.testing.assert_allclose(forward_sum(backward_diff(x)).values(1, 8), x.values(1, 8))

    @pytest.mark.parametrize("d", [cesaro_schedule(), block_schedule(), poly_schedule(1, 2)],
                             ids=["cesaro", "block", "poly"])
    def test_difference_of_zeta_is_shifted_wedge(self, d):
        """Test S^-1 zeta^n is the wedge element of the schedule shifted by one."""
        for n in (1, 2, 7, 30):
            left = backward_diff(zeta(d, n)).values(1, 1000)
            right = deferred_wedge_elem(d.shifted(1), n).values(1, 1000)
            np.testing.assert_allclose(left, right, atol=1e-12)

    def test_sum_of_shifted_wedge_is_zeta(self):
        """Test S applied to the shifted wedge element rebuilds zeta^n."""
        d = poly_schedule(1, 2)
        left = forward_sum(deferred_wedge_elem(d.shifted(1), 4)).values(1, 100)
        np.testing.assert_allclose(left, zeta(d, 4).values(1, 100), atol=1e-12)

"""Unit tests for infinite matrices, transforms and summability domains."""

import numpy as np
import pytest

from src.defsum.convergence import DetectParams, VerdictStatus
from src.defsum.errors import TailOracleError
from src.defsum.matrices import (MATRIX_CATALOG, CesaroC1, DeferredMeanMatrix, Difference, Identity,
                                 InfiniteMatrix, RowBound, ShiftLeft, UserTable, WeightedMean,
                                 Zweier, apply_row, characteristic, classify, domain_member,
                                 power_weights, transform, zero_matrix, zeta_image_seq)
from src.defsum.sequences import (Tail, alternating, block_schedule, cesaro_schedule, deferred_mean,
                                  from_table, geometric, ones, periodic, poly_schedule, random_decay, zeta)
from src.defsum.spaces import BV0, C, C0, L1, LINF


def catalog():
    return [
        Identity(),
        CesaroC1(),
        Difference(),
        Zweier(0.3),
        ShiftLeft(),
        DeferredMeanMatrix(poly_schedule(1, 2)),
        WeightedMean(power_weights(1.0)),
        UserTable([[1.0, 2.0], [0.5, 0.5, -1.0]]),
        zero_matrix(),
    ]


CATALOG_IDS = ["identity", "cesaro", "difference", "zweier", "shift-left", "deferred-mean",
               "weighted-mean", "table", "zero"]


class TestCatalog:
    """Tests shared by every catalog matrix."""

    def test_catalog_ids(self):
        """Test the catalog exposes every id."""
        assert sorted(MATRIX_CATALOG) == sorted(CATALOG_IDS)

    @pytest.mark.parametrize("A", catalog(), ids=CATALOG_IDS)
    def test_entry_and_tail_consistent(self, A):
        """Test a_{i,k+1} + tail(i, k+1) = tail(i, k)."""
        assert A.check_consistency(200, 200) <= 1e-12

    @pytest.mark.parametrize("A", catalog(), ids=CATALOG_IDS)
    def test_closed_form_tail_averages(self, A):
        """Test each closed form against the generic head-plus-tail computation."""
        rows = np.arange(1, 80)
        for p, q in ((0, 5), (3, 12), (20, 41)):
            fast = A.tail_averages(rows, p, q)
            generic = InfiniteMatrix.tail_averages(A, rows, p, q)
            np.testing.assert_allclose(fast, generic, atol=1e-12)

    @pytest.mark.parametrize("A", catalog(), ids=CATALOG_IDS)
    def test_zeta_image_matches_direct_product(self, A):
        """Test the tail identity against sum_j a_ij zeta_j."""
        d = cesaro_schedule()
        for n in (1, 4, 25):
            via_tails = zeta_image_seq(A, d, n).values(1, 60)
            direct = transform(A, zeta(d, n)).values(1, 60)
            np.testing.assert_allclose(via_tails, direct, atol=1e-12)

    @pytest.mark.parametrize("A", catalog(), ids=CATALOG_IDS)
    def test_regime_rows_are_settled(self, A):
        """Test rows from the settle index on match the regime for an eventually constant input."""
        d = block_schedule()
        n = 6
        regime = A.zeta_regime(d, n)
        image = zeta_image_seq(A, d, n)
        rows = image.values(regime.settle, regime.settle + 40)
        if regime.exact:
            np.testing.assert_allclose(rows, regime.limit, atol=1e-12)
        else:
            gaps = np.abs(rows - regime.limit)
            assert np.all(np.diff(gaps) <= 1e-12)


class TestMatrices:
    """Tests for individual catalog matrices."""

    def test_identity_zeta_image_is_zeta(self):
        """Test I.zeta^n = zeta^n."""
        d = cesaro_schedule()
        np.testing.assert_allclose(zeta_image_seq(Identity(), d, 5).values(1, 12),
                                   zeta(d, 5).values(1, 12))

    def test_difference_zeta_image(self):
        """Test the difference image is -1/m on the window."""
        image = zeta_image_seq(Difference(), block_schedule(), 4).values(1, 10)
        expected = np.where((np.arange(1, 11) > 4) & (np.arange(1, 11) <= 8), -0.25, 0.0)
        np.testing.assert_allclose(image, expected, atol=1e-15)

    def test_deferred_mean_matrix_matches_deferred_mean(self):
        """Test DeferredMean(d) applied to x equals deferred_mean(x, d)."""
        d = poly_schedule(1, 2)
        x = random_decay(5, 0.95)
        np.testing.assert_allclose(transform(DeferredMeanMatrix(d), x).values(1, 40),
                                   deferred_mean(x, d).values(1, 40), rtol=1e-12, atol=1e-15)

    def test_deferred_mean_regime(self):
        """Test the settle row for block and Cesaro schedules."""
        exact = DeferredMeanMatrix(block_schedule()).regime(11, 1.0)
        assert (exact.settle, exact.exact) == (10, True)
        monotone = DeferredMeanMatrix(cesaro_schedule()).regime(11, 1.0)
        assert (monotone.settle, monotone.exact) == (10, False)

    def test_zweier_entries(self):
        """Test the two-band Zweier rows."""
        np.testing.assert_allclose(Zweier(0.3).row(3, 4), [0.0, 0.7, 0.3, 0.0])

    def test_weighted_mean_rejects_nonpositive_weights(self):
        """Test weights must be positive."""
        A = WeightedMean(periodic([1.0, 0.0]))
        with pytest.raises(ValueError):
            A.entry(3, 1)

    def test_zero_matrix_rows_are_empty(self):
        """Test the zero matrix has empty rows."""
        A = zero_matrix()
        assert A.row_support(5) == 0
        assert apply_row(A, ones(), 5).value == 0.0

    def test_describe(self):
        """Test parameterised names."""
        assert Zweier(0.5).describe() == "zweier(alpha=0.5)"
        assert DeferredMeanMatrix(block_schedule()).describe() == "deferred-mean(schedule=block)"


class TestCustomMatrix:
    """Tests for matrices given only by an entry rule."""

    def test_numeric_tail_with_row_bound(self):
        """Test the geometric fallback sums the row tail."""
        A = InfiniteMatrix(entry=lambda i, j: 0.5 ** j, row_bound=RowBound(1.0, 0.5))
        assert A.row_tail(1, 3) == pytest.approx(0.5 ** 3, abs=1e-14)

    def test_missing_bound_raises(self):
        """Test infinite rows without a bound refuse a tail."""
        A = InfiniteMatrix(entry=lambda i, j: 1.0 / j ** 2)
        with pytest.raises(TailOracleError):
            A.row_tail(1, 3)

    def test_tail_averages_flag_nan(self):
        """Test refused tails become nan rows."""
        A = InfiniteMatrix(entry=lambda i, j: 1.0 / j ** 2)
        assert np.isnan(A.tail_averages(np.array([1, 2]), 0, 3)).all()

    def test_apply_row_error_bound(self):
        """Test a declared bound and a bounded input give a finite error bound."""
        A = InfiniteMatrix(entry=lambda i, j: 0.5 ** j, row_bound=RowBound(1.0, 0.5))
        row = apply_row(A, ones(), 1, trunc=60)
        assert row.bounded
        assert row.value == pytest.approx(1.0, abs=1e-12)

    def test_apply_row_without_bound_is_unbounded(self):
        """Test no bound means no error bound."""
        A = InfiniteMatrix(entry=lambda i, j: 1.0 / j ** 2)
        assert apply_row(A, ones(), 1, trunc=50).bounded is False

    def test_finite_input_needs_no_bound(self):
        """Test an eventually zero input is summed exactly without a row bound."""
        A = InfiniteMatrix(entry=lambda i, j: 1.0 / j)
        row = apply_row(A, from_table([1.0, 2.0]), 1)
        assert (row.value, row.error_bound) == (2.0, 0.0)


class TestTransform:
    """Tests for transform tails."""

    def test_identity_of_ones_has_constant_tail(self):
        """Test the regime supplies the image tail."""
        assert transform(Identity(), ones()).tail == Tail.constant(1, 1.0)

    def test_cesaro_of_ones_has_monotone_tail(self):
        """Test a monotone regime becomes a monotone tail."""
        tail = transform(CesaroC1(), ones()).tail
        assert (tail.kind.value, tail.value) == ("monotone", 1.0)


class TestCharacteristic:
    """Tests for conull/coregular classification."""

    def test_identity_is_coregular(self):
        """Test chi(I) = 1."""
        assert characteristic(Identity()) == 1.0
        assert classify(Identity()) == "coregular"

    def test_difference_is_conull(self):
        """Test chi(Delta) = 0."""
        assert classify(Difference()) == "conull"

    def test_custom_is_unknown(self):
        """Test a bare entry rule cannot be classified."""
        assert classify(InfiniteMatrix(entry=lambda i, j: 0.0)) == "unknown"


class TestDomainMember:
    """Tests for membership in summability domains."""

    def setup_method(self):
        """Set up test fixtures."""
        self.params = DetectParams.for_membership(tol=1e-2, horizon=500)

    def test_cesaro_domain_of_c(self):
        """Test 1, 0, 1, 0, ... is C1-summable to 1/2."""
        verdict = domain_member(C, CesaroC1(), periodic([1.0, 0.0]), self.params)
        assert verdict.converged
        assert abs(verdict.limit - 0.5) < 1e-2

    def test_identity_domain_of_c0(self):
        """Test e is in c but not in c0."""
        verdict = domain_member(C0, Identity(), ones(), self.params)
        assert verdict.status is VerdictStatus.DIVERGED

    def test_identity_domain_of_l1(self):
        """Test a geometric sequence is in l."""
        verdict = domain_member(L1, Identity(), geometric(1.0, 0.5), self.params)
        assert verdict.converged
        assert verdict.limit == pytest.approx(1.0, abs=1e-9)

    def test_bv0_requires_null_image(self):
        """Test e has no variation but is not null."""
        verdict = domain_member(BV0, Identity(), ones(), self.params)
        assert verdict.status is VerdictStatus.DIVERGED
        assert "Ax is not null" in verdict.notes

    def test_linf_domain_of_difference(self):
        """Test the differences of 1, -1, 1, ... stay bounded by 2."""
        verdict = domain_member(LINF, Difference(), alternating(), self.params)
        assert verdict.converged
        assert verdict.limit == pytest.approx(2.0)

    def test_unbounded_rows_are_inconclusive(self):
        """Test rows without error bounds leave membership undecided."""
        A = InfiniteMatrix(entry=lambda i, j: 1.0 / j ** 2)
        verdict = domain_member(C, A, ones(), DetectParams.for_membership(horizon=20))
        assert verdict.status is VerdictStatus.INCONCLUSIVE

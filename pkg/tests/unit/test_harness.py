"""Unit tests for the verification suites."""

import pytest

from src.defsum.convergence import DetectParams, Outcome
from src.defsum.harness import (SUITES, CaseResult, SuiteReport, catalog_cases, cesaro_summable_case,
                                check_agnew_forward, check_agnew_reverse, check_dual_conull,
                                check_implication_diagram, check_ksi_identity, check_regularity,
                                check_S_lemma, check_sigmaK_implies_conull, s_lemma_gaps)
from src.defsum.matrices import Difference, Identity
from src.defsum.sequences import (block_schedule, cesaro_mean, cesaro_schedule, poly_schedule,
                                  sliding_schedule)


class TestSuiteReport:
    """Tests for SuiteReport counting."""

    def setup_method(self):
        """Set up test fixtures."""
        self.report = SuiteReport("demo", (
            CaseResult("a", True),
            CaseResult("b", False, "off by one"),
            CaseResult("c", True, "inconclusive", excluded=True),
        ))

    def test_counts(self):
        """Test excluded cases count neither way."""
        assert (self.report.passed, self.report.failed, self.report.excluded) == (1, 1, 1)

    def test_outcome_fails_on_any_failure(self):
        """Test a single failure fails the suite."""
        assert self.report.outcome is Outcome.FAILS
        assert self.report.all_passed is False

    def test_summary(self):
        """Test the one-line summary."""
        assert self.report.summary() == "demo: 1 passed, 1 failed, 1 excluded"

    def test_skipped_is_inconclusive(self):
        """Test a skipped suite neither holds nor fails."""
        report = SuiteReport("demo", skipped=True)
        assert report.outcome is Outcome.INCONCLUSIVE
        assert report.summary() == "demo: skipped"

    def test_registry(self):
        """Test every suite is addressable by name."""
        assert sorted(SUITES) == sorted(["regularity", "agnew-forward", "agnew-reverse", "ksi",
                                         "s-lemma", "sigma-k", "diagram", "dual"])


class TestRegularity:
    """Tests for check_regularity."""

    def test_block_schedule_is_regular(self):
        """Test L + C r^k averages to L under block means."""
        report = check_regularity(seed=3, trials=4, d=block_schedule(), horizon=2000)
        assert report.passed == 4
        assert report.outcome is Outcome.HOLDS

    def test_cesaro_schedule_is_regular(self):
        """Test the Cesaro mean at the default horizon."""
        report = check_regularity(seed=1, trials=3, d=cesaro_schedule())
        assert report.failed == 0

    def test_regularity_at_default_scale(self):
        """Test 200 trials on each default schedule at the default horizon."""
        report = check_regularity()
        assert len(report.cases) == 600
        assert report.failed == 0
        assert report.excluded == 0

    def test_zero_trials_rejected(self):
        """Test trials must be positive."""
        with pytest.raises(ValueError):
            check_regularity(trials=0)


class TestAgnew:
    """Tests for consistency with the Cesaro mean."""

    def test_constructed_cases_are_cesaro_summable(self):
        """Test the generator's limit is the Cesaro limit."""
        x, limit = cesaro_summable_case(seed=2, trial=0)
        verdict = DetectParams.for_membership(horizon=20_000).detect(cesaro_mean(x))
        assert verdict.converged
        assert abs(verdict.limit - limit) < 1e-3

    def test_forward_direction(self):
        """Test Cesaro summable cases stay summable under block means."""
        report = check_agnew_forward(seed=4, trials=3, horizon=20_000)
        assert report.skipped is False
        assert report.failed == 0
        assert report.notes[0].startswith("schedule block")

    def test_forward_skips_unbounded_ratio(self):
        """Test p(n)/(q(n)-p(n)) = n makes the direction inapplicable."""
        report = check_agnew_forward(trials=1, d=sliding_schedule(1), horizon=1000)
        assert report.skipped is True
        assert report.outcome is Outcome.INCONCLUSIVE

    def test_reverse_direction(self):
        """Test deferred summable cases with q(n) = n are Cesaro summable."""
        report = check_agnew_reverse(seed=4, trials=3, horizon=20_000)
        assert report.failed == 0

    def test_reverse_requires_q_equal_n(self):
        """Test q(n) = 2n is refused."""
        report = check_agnew_reverse(trials=1, p=block_schedule(), horizon=1000)
        assert report.skipped is True


class TestIdentities:
    """Tests for the tail identity and the S/S^-1 lemma."""

    def test_ksi_identity(self):
        """Test the tail identity holds to 1e-10."""
        report = check_ksi_identity(seed=7, trials=5, trunc=200)
        assert report.passed == 5

    def test_ksi_identity_at_default_scale(self):
        """Test 500 seeded trials up to n = 1000."""
        report = check_ksi_identity()
        assert report.passed == 500
        assert report.outcome is Outcome.HOLDS

    def test_ksi_identity_poly(self):
        """Test the tail identity under a polynomial schedule."""
        report = check_ksi_identity(seed=1, trials=3, d=poly_schedule(1, 2), trunc=60)
        assert report.failed == 0

    def test_s_lemma_suite(self):
        """Test the exact identities on every default schedule."""
        report = check_S_lemma(n_max=10, coords=100)
        assert len(report.cases) == 30
        assert report.failed == 0

    def test_s_lemma_gaps_are_zero(self):
        """Test the four gaps for one window."""
        gaps = s_lemma_gaps(block_schedule(), 7, 60)
        assert set(gaps) == {"diff(zeta) = wedge+", "sum(wedge+) = zeta",
                             "sum(diff(zeta)) = zeta", "diff(sum(wedge)) = wedge"}
        assert max(gaps.values()) <= 1e-12


class TestStructuralSuites:
    """Tests for the catalog-driven suites."""

    def test_sigmaK_never_contradicts_conullity(self):
        """Test the sectional property on e implies the conullity criterion."""
        report = check_sigmaK_implies_conull()
        assert len(report.cases) == len(catalog_cases())
        assert report.failed == 0

    def test_implication_diagram(self):
        """Test strong conullity implies the wedge property, with a separating witness."""
        report = check_implication_diagram()
        assert report.failed == 0
        assert report.notes[0].startswith("wedge without conullity witnessed by")
        assert "identity/cesaro" in report.notes[0]

    def test_diagram_without_witness_is_noted(self):
        """Test a case list with no separation says so."""
        cases = [(Difference(), cesaro_schedule())]
        report = check_implication_diagram(cases)
        assert report.notes == ("separation wedge/conull not witnessed",)

    def test_diagram_excludes_inconclusive_cases(self):
        """Test short horizons exclude undecided cases instead of failing them."""
        report = check_implication_diagram([(Difference(), cesaro_schedule())],
                                           DetectParams.for_criteria(horizon=20))
        assert report.excluded == 1

    def test_dual_conull(self):
        """Test e and its sections lie in z^d for every summable z."""
        report = check_dual_conull(params=DetectParams.for_membership(horizon=2000))
        assert report.failed == 0
        assert report.passed + report.excluded == 4

    def test_sigmaK_single_case(self):
        """Test a coregular matrix yields a consistent failing pair."""
        report = check_sigmaK_implies_conull([(Identity(), cesaro_schedule())],
                                             DetectParams.for_criteria(horizon=30))
        assert report.cases[0].detail == "sectional fails, conull fails"

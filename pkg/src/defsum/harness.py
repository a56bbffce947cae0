"""Verification suites for the computable consequences of deferred Cesaro
summability: regularity, consistency with the Cesaro mean in both
directions, the tail identity for deferred partial sums, the S/S^-1 lemma,
the sectional property against conullity, the implication diagram and the
dual conullity consequence.

Test sequences are built constructively so that their limits are known in
closed form; detect_limit is never its own oracle.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

try:
    from . import config
    from .convergence import DetectParams, Outcome, VerdictStatus
    from .criteria import criterion_cA, criterion_wedge, parallel_map, section_test
    from .matrices import (CesaroC1, Difference, Identity, InfiniteMatrix, ShiftLeft, Zweier,
                           zero_matrix)
    from .sequences import (DefermentSchedule, Seq, alternating, backward_diff, block_schedule,
                            cesaro_mean, cesaro_schedule, deferred_mean, deferred_wedge_elem,
                            forward_sum, geometric, harmonic_power, ones, periodic, poly_schedule,
                            section_ones, sliding_schedule, unit, zeta)
    from .spaces import C, d_dual_test, member_sigma_pq_s
    from .summation import PrefixSums
except ImportError:
    import config
    from convergence import DetectParams, Outcome, VerdictStatus
    from criteria import criterion_cA, criterion_wedge, parallel_map, section_test
    from matrices import (CesaroC1, Difference, Identity, InfiniteMatrix, ShiftLeft, Zweier,
                          zero_matrix)
    from sequences import (DefermentSchedule, Seq, alternating, backward_diff, block_schedule,
                           cesaro_mean, cesaro_schedule, deferred_mean, deferred_wedge_elem,
                           forward_sum, geometric, harmonic_power, ones, periodic, poly_schedule,
                           section_ones, sliding_schedule, unit, zeta)
    from spaces import C, d_dual_test, member_sigma_pq_s
    from summation import PrefixSums

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CaseResult:
    """One checked case. Excluded cases (inconclusive verdicts) count neither way."""
    name: str
    passed: bool
    detail: str = ""
    excluded: bool = False


@dataclass(frozen=True)
class SuiteReport:
    name: str
    cases: tuple = ()
    notes: tuple = ()
    skipped: bool = False

    @property
    def passed(self) -> int:
        """Cases that passed, excluded ones not counted."""
        return sum(1 for c in self.cases if c.passed and not c.excluded)

    @property
    def failed(self) -> int:
        """Cases that failed, excluded ones not counted."""
        return sum(1 for c in self.cases if not c.passed and not c.excluded)

    @property
    def excluded(self) -> int:
        return sum(1 for c in self.cases if c.excluded)

    @property
    def all_passed(self) -> bool:
        return not self.skipped and self.failed == 0

    @property
    def outcome(self) -> Outcome:
        """Inconclusive when skipped, else holds iff nothing failed."""
        if self.skipped:
            return Outcome.INCONCLUSIVE
        return Outcome.HOLDS if self.failed == 0 else Outcome.FAILS

    def summary(self) -> str:
        if self.skipped:
            return f"{self.name}: skipped"
        return f"{self.name}: {self.passed} passed, {self.failed} failed, {self.excluded} excluded"


def _finish(name: str, cases: Sequence[CaseResult], notes: Sequence[str] = ()) -> SuiteReport:
    report = SuiteReport(name, tuple(cases), tuple(notes))
    for case in report.cases:
        if case.excluded:
            logger.warning("%s: excluded %s (%s)", name, case.name, case.detail)
        elif not case.passed:
            logger.error("%s: %s failed: %s", name, case.name, case.detail)
    logger.info(report.summary())
    return report


def _skipped(name: str, note: str) -> SuiteReport:
    logger.warning("%s skipped: %s", name, note)
    return SuiteReport(name, (), (note,), skipped=True)


def default_schedules() -> list[DefermentSchedule]:
    """Schedules tried when a suite is given none."""
    return [cesaro_schedule(), block_schedule(), poly_schedule(1, 2)]


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _check_limit(label: str, seq: Seq, target: float, params: DetectParams, tol: float) -> tuple[bool, str]:
    verdict = params.detect(seq)
    if not verdict.converged:
        return False, f"{label} {verdict.status.value} (residual {verdict.residual:.3g})"
    error = abs(verdict.limit - target)
    return error < tol, f"{label} -> {verdict.limit:.10g}, |error| {error:.3g}"


def check_regularity(seed: int = 0, trials: int = 200, d: Optional[DefermentSchedule] = None,
                     tol: float = config.SUITE_TOL, horizon: int = config.SUITE_HORIZON) -> SuiteReport:
    """Deferred means of x_k = L + C r^k converge to L for every schedule tried."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    schedules = [d] if d is not None else default_schedules()
    params = DetectParams.for_membership(tol=tol, horizon=horizon)

    def trial(args):
        schedule, t = args
        rng = _trial_rng(seed, t)
        limit = float(rng.uniform(-5.0, 5.0))
        coefficient = float(rng.uniform(-1.0, 1.0))
        ratio = float(rng.uniform(-0.8, 0.8))
        x = geometric(coefficient, ratio, limit)
        ok, detail = _check_limit("deferred mean", deferred_mean(x, schedule), limit, params, tol)
        return CaseResult(f"{schedule.describe()}#{t}", ok, detail)

    cases = parallel_map(trial, [(s, t) for s in schedules for t in range(trials)])
    return _finish("regularity", cases)


def cesaro_summable_case(seed: int, trial: int) -> tuple[Seq, float]:
    """L + (zero-mean periodic pattern) + C r^k: Cesaro summable to L by construction."""
    rng = _trial_rng(seed, trial)
    period = int(rng.integers(2, 7))
    pattern = rng.uniform(-1.0, 1.0, size=period)
    pattern = pattern - pattern.mean()
    limit = float(rng.uniform(-2.0, 2.0))
    noise = geometric(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(-0.8, 0.8)), limit)
    return periodic(pattern, f"pattern{period}") + noise, limit


def check_agnew_forward(seed: int = 0, trials: int = 100, d: Optional[DefermentSchedule] = None,
                        tol: float = config.SUITE_TOL, horizon: int = 100_000) -> SuiteReport:
    """Cesaro summable to L implies deferred summable to L when p(n)/(q(n)-p(n)) is bounded."""
    d = d or block_schedule()
    bound, bounded = d.agnew_ratio_bound(horizon)
    if not bounded:
        return _skipped("agnew-forward", f"p(n)/(q(n)-p(n)) not bounded on [1, {horizon}] (max {bound:g})")
    params = DetectParams.for_membership(tol=tol, horizon=horizon)

    def trial(t):
        x, limit = cesaro_summable_case(seed, t)
        ok_c, detail_c = _check_limit("cesaro", cesaro_mean(x), limit, params, tol)
        if not ok_c:
            return CaseResult(f"#{t}", False, detail_c, excluded=True)
        ok_d, detail_d = _check_limit("deferred", deferred_mean(x, d), limit, params, tol)
        return CaseResult(f"#{t}", ok_d, f"{detail_c}; {detail_d}")

    cases = parallel_map(trial, range(trials))
    return _finish("agnew-forward", cases, (f"schedule {d.describe()}, ratio bound {bound:g}",))


def check_agnew_reverse(seed: int = 0, trials: int = 100, p: Optional[DefermentSchedule] = None,
                        tol: float = config.SUITE_TOL, horizon: int = 100_000) -> SuiteReport:
    """Deferred summable to L with q(n) = n implies Cesaro summable to L."""
    d = p or DefermentSchedule(lambda n: n // 2, lambda n: n, "half")
    _, q = d.bounds(1, horizon)
    if not np.array_equal(q, np.arange(1, horizon + 1)):
        return _skipped("agnew-reverse", "the schedule must have q(n) = n")
    params = DetectParams.for_membership(tol=tol, horizon=horizon)

    def trial(t):
        x, limit = cesaro_summable_case(seed, t)
        ok_d, detail_d = _check_limit("deferred", deferred_mean(x, d), limit, params, tol)
        if not ok_d:
            return CaseResult(f"#{t}", False, detail_d, excluded=True)
        ok_c, detail_c = _check_limit("cesaro", cesaro_mean(x), limit, params, tol)
        return CaseResult(f"#{t}", ok_c, f"{detail_d}; {detail_c}")

    cases = parallel_map(trial, range(trials))
    return _finish("agnew-reverse", cases, (f"schedule {d.describe()}",))


def _ksi_gap(F: float, head: np.ndarray, coefficient: float, ratio: float,
             d: DefermentSchedule, horizon: int) -> float:
    """max_n |LHS - RHS| of

        F - (1/(q-p)) sum_k sum_{j<=k} t_j = (F - sum_j t_j) + (1/(q-p)) sum_k sum_{j>k} t_j

    for t = head followed by coefficient * ratio^j. The left side sums values
    numerically; the right side uses closed-form geometric tails.
    """
    h = head.shape[0]
    p, q = d.bounds(1, horizon)
    top = int(q.max())
    idx = np.arange(1, top + 1)
    values = np.where(idx <= h, np.pad(head, (0, max(top - h, 0)))[:top], coefficient * np.power(ratio, idx))
    partial = PrefixSums(values).prefix(idx)
    lhs = F - PrefixSums(partial).window(p + 1, q) / (q - p)

    geo_rest = coefficient * ratio ** (h + 1) / (1.0 - ratio)
    head_tails = np.concatenate([np.cumsum(head[::-1])[::-1], [0.0]])  # sum_{j>k} head_j, k = 0..h
    k = idx
    tails = np.where(k >= h, coefficient * np.power(ratio, k + 1) / (1.0 - ratio),
                     head_tails[np.minimum(k, h)] + geo_rest)
    total = math.fsum(head.tolist()) + geo_rest
    rhs = (F - total) + PrefixSums(tails).window(p + 1, q) / (q - p)
    return float(np.abs(lhs - rhs).max())


def check_ksi_identity(seed: int = 0, trials: int = 500, d: Optional[DefermentSchedule] = None,
                       trunc: int = 1000, tol: float = config.IDENTITY_TOL) -> SuiteReport:
    """The tail identity holds to IDENTITY_TOL at every n <= trunc."""
    d = d or cesaro_schedule()

    def trial(t):
        rng = _trial_rng(seed, t)
        F = float(rng.uniform(-5.0, 5.0))
        head = rng.uniform(-1.0, 1.0, size=int(rng.integers(0, 21)))
        coefficient = float(rng.uniform(-1.0, 1.0))
        ratio = float(rng.uniform(-0.9, 0.9))
        gap = _ksi_gap(F, head, coefficient, ratio, d, trunc)
        return CaseResult(f"#{t}", gap <= tol, f"max gap {gap:.3g}")

    cases = parallel_map(trial, range(trials))
    return _finish("ksi", cases, (f"schedule {d.describe()}",))


def s_lemma_gaps(d: DefermentSchedule, n: int, coords: int) -> dict[str, float]:
    """Coordinate gaps of the S/S^-1 identities for zeta^n.

    S^-1 zeta^n is the wedge element of the schedule shifted by one, and S of
    that wedge element gives zeta^n back.
    """
    z = zeta(d, n)
    wedge = deferred_wedge_elem(d.shifted(1), n)
    own = deferred_wedge_elem(d, n)

    def gap(a: Seq, b: Seq) -> float:
        return float(np.abs(a.values(1, coords) - b.values(1, coords)).max())

    return {
        "diff(zeta) = wedge+": gap(backward_diff(z), wedge),
        "sum(wedge+) = zeta": gap(forward_sum(wedge), z),
        "sum(diff(zeta)) = zeta": gap(forward_sum(backward_diff(z)), z),
        "diff(sum(wedge)) = wedge": gap(backward_diff(forward_sum(own)), own),
    }


def check_S_lemma(d: Optional[DefermentSchedule] = None, n_max: int = 100,
                  coords: int = 1000, tol: float = 1e-12) -> SuiteReport:
    """Exact S/S^-1 identities for n <= n_max on the first ``coords`` coordinates."""
    schedules = [d] if d is not None else default_schedules()

    def case(args):
        schedule, n = args
        gaps = s_lemma_gaps(schedule, n, coords)
        worst = max(gaps, key=gaps.get)
        return CaseResult(f"{schedule.describe()}@n={n}", gaps[worst] <= tol,
                          f"worst {worst}: {gaps[worst]:.3g}")

    cases = parallel_map(case, [(s, n) for s in schedules for n in range(1, n_max + 1)])
    return _finish("s-lemma", cases)


def catalog_cases() -> list[tuple[InfiniteMatrix, DefermentSchedule]]:
    """Matrix/schedule pairs the structural suites run over."""
    return [
        (Identity(), cesaro_schedule()),
        (Identity(), block_schedule()),
        (Difference(), cesaro_schedule()),
        (Difference(), sliding_schedule(1)),
        (CesaroC1(), cesaro_schedule()),
        (Zweier(0.5), block_schedule()),
        (ShiftLeft(), cesaro_schedule()),
        (zero_matrix(), cesaro_schedule()),
    ]


def check_sigmaK_implies_conull(cases=None, params: Optional[DetectParams] = None) -> SuiteReport:
    """No domain may have the sectional property on e while its conullity criterion fails."""
    cases = cases if cases is not None else catalog_cases()

    def case(args):
        A, d = args
        name = f"{A.describe()}/{d.describe()}"
        sectional = section_test(C, A, ones(), d, params)
        conull = criterion_cA(A, d, params)
        detail = f"sectional {sectional.outcome.value}, conull {conull.outcome.value}"
        if Outcome.INCONCLUSIVE in (sectional.outcome, conull.outcome):
            return CaseResult(name, True, detail, excluded=True)
        violated = sectional.outcome is Outcome.HOLDS and conull.outcome is Outcome.FAILS
        return CaseResult(name, not violated, detail)

    return _finish("sigma-k", parallel_map(case, cases))


def check_implication_diagram(cases=None, params: Optional[DetectParams] = None) -> SuiteReport:
    """Strong conullity implies the deferred wedge property, and the converse fails somewhere.

    On c_A weak and strong deferred conullity share one trace, so the middle
    level of the diagram is not computed separately.
    """
    cases = cases if cases is not None else catalog_cases()

    def case(args):
        A, d = args
        strong = criterion_cA(A, d, params)
        wedge = criterion_wedge(C, A, d, params)
        return A, d, strong.outcome, wedge.outcome

    results = parallel_map(case, cases)
    checked, notes = [], []
    witnesses = []
    for A, d, strong, wedge in results:
        name = f"{A.describe()}/{d.describe()}"
        detail = f"strong {strong.value}, wedge {wedge.value}"
        if Outcome.INCONCLUSIVE in (strong, wedge):
            checked.append(CaseResult(name, True, detail, excluded=True))
            continue
        checked.append(CaseResult(name, not (strong is Outcome.HOLDS and wedge is Outcome.FAILS), detail))
        if wedge is Outcome.HOLDS and strong is Outcome.FAILS:
            witnesses.append(name)
    if witnesses:
        notes.append(f"wedge without conullity witnessed by {', '.join(witnesses)}")
    else:
        notes.append("separation wedge/conull not witnessed")
        logger.warning("implication diagram: no separation witness among %d cases", len(results))
    return _finish("diagram", checked, notes)


def dual_cases() -> list[Seq]:
    """Summable z used by the dual suite."""
    return [unit(1), alternating(), harmonic_power(2.0), geometric(1.0, 0.5)]


def check_dual_conull(d: Optional[DefermentSchedule] = None, cases: Optional[Sequence[Seq]] = None,
                      params: Optional[DetectParams] = None) -> SuiteReport:
    """For z in sigma_p^q[s]: e and every finite section e^(k) lie in z^d."""
    d = d or cesaro_schedule()
    cases = list(cases) if cases is not None else dual_cases()
    params = params or DetectParams.for_membership()

    def case(z):
        member = member_sigma_pq_s(z, d, params)
        if not member.converged:
            return CaseResult(z.name, True, f"z not in sigma_p^q[s] ({member.status.value})", excluded=True)
        partners = [ones()] + [section_ones(k) for k in (1, 5, 20)]
        verdicts = [d_dual_test(x, z, d, params) for x in partners]
        failing = [x.name for x, v in zip(partners, verdicts) if v.status is not VerdictStatus.CONVERGED]
        return CaseResult(z.name, not failing, f"not in z^d: {failing}" if failing else "e and sections in z^d")

    return _finish("dual", parallel_map(case, cases), (f"schedule {d.describe()}",))


SUITES = {
    "regularity": check_regularity,
    "agnew-forward": check_agnew_forward,
    "agnew-reverse": check_agnew_reverse,
    "ksi": check_ksi_identity,
    "s-lemma": check_S_lemma,
    "sigma-k": check_sigmaK_implies_conull,
    "diagram": check_implication_diagram,
    "dual": check_dual_conull,
}

"""Deferred Cesaro conullity criteria for summability domains Y_A.

Each criterion reduces to a trace n -> T_n evaluated for n = 1..horizon and a
verdict on T_n -> 0. Sup and sum over all rows i are made finite through the
matrix's row regime; without one the caller must pass an i-horizon and the
report says so.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

try:
    from . import config
    from .convergence import (ConvergenceVerdict, DetectParams, Outcome, VerdictStatus,
                              limit_outcome, null_outcome)
    from .matrices import InfiniteMatrix, RowRegime, transform, zeta_image_seq
    from .sequences import (DefermentSchedule, Seq, Tail, deferred_wedge_elem, product, zeta)
    from .spaces import BV, C, L1, LIMIT_UNDETECTED, SpaceId, SpaceTag, member_sigma_pq_s, norm
    from .summation import PrefixSums, compensated_sum
except ImportError:
    import config
    from convergence import (ConvergenceVerdict, DetectParams, Outcome, VerdictStatus,
                             limit_outcome, null_outcome)
    from matrices import InfiniteMatrix, RowRegime, transform, zeta_image_seq
    from sequences import (DefermentSchedule, Seq, Tail, deferred_wedge_elem, product, zeta)
    from spaces import BV, C, L1, LIMIT_UNDETECTED, SpaceId, SpaceTag, member_sigma_pq_s, norm
    from summation import PrefixSums, compensated_sum

logger = logging.getLogger(__name__)


class CriterionId(Enum):
    C_A_STRONG = "C_A_STRONG"
    L1_A = "L1_A"
    BV_A = "BV_A"
    LINF_A = "LINF_A"
    LINF_A_BOUND = "LINF_A_BOUND"
    LINF_A_MIN = "LINF_A_MIN"
    ZETA_IMAGE = "ZETA_IMAGE"
    SECTION_TEST = "SECTION_TEST"
    WEDGE = "WEDGE"


@dataclass(frozen=True)
class CriterionReport:
    """Trace, verdict and outcome of one criterion.

    ``outcome`` is the criterion's truth value at truncation: for null traces
    it holds when T_n converges below tol. ``parts`` holds sub-reports (the
    two halves of the l_infinity criterion) and ``table`` the sampled
    (epsilon, L, worst value, holds) grid.
    """
    criterion: CriterionId
    matrix: str
    schedule: str
    trace: tuple
    verdict: ConvergenceVerdict
    outcome: Outcome
    regime: str = ""
    space: Optional[str] = None
    notes: tuple = ()
    parts: tuple = ()
    table: tuple = ()

    @property
    def label(self) -> str:
        """Criterion id with its space, e.g. C_A_STRONG(c)."""
        if self.space is None:
            return self.criterion.value
        return f"{self.criterion.value}({self.space})"

    @property
    def holds(self) -> bool:
        return self.outcome is Outcome.HOLDS


def parallel_map(fn: Callable, items: Iterable) -> list:
    """Map in input order, on up to DEFSUM_THREADS worker threads."""
    workers = config.thread_limit()
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _inconclusive(criterion, A, d, space, params, note) -> CriterionReport:
    logger.warning("%s on %s: %s", criterion.value, A.describe(), note)
    verdict = ConvergenceVerdict(VerdictStatus.INCONCLUSIVE, None, math.inf, (), params.tol, (note,))
    return CriterionReport(criterion, A.describe(), d.describe(), (), verdict, Outcome.INCONCLUSIVE,
                           "", space, (note,))


def _null_trace(criterion: CriterionId, space: SpaceId, A: InfiniteMatrix, d: DefermentSchedule,
                image: Callable[[int], tuple[Seq, Optional[RowRegime]]],
                params: DetectParams, i_horizon: Optional[int]) -> CriterionReport:
    """T_n = ||image(n)|| in the space, decided on T_n -> 0."""

    def term(n):
        seq, regime = image(n)
        if regime is not None:
            return norm(space, seq, regime.settle), regime.describe()
        if i_horizon is None:
            return None
        return norm(space, seq, i_horizon), f"rows truncated at i-horizon {i_horizon}"

    results = parallel_map(term, range(1, params.horizon + 1))
    if any(r is None for r in results):
        return _inconclusive(criterion, A, d, space.name, params,
                             "no row regime for this matrix; an i-horizon is required")
    values = np.array([r[0].value for r in results])
    notes = []
    inexact = sum(1 for r, _ in results if not r.exact)
    if inexact:
        notes.append(f"{inexact} of {len(results)} norms inexact")
    regime_note = results[-1][1]

    if np.any(np.isnan(values)):
        return _inconclusive(criterion, A, d, space.name, params, "row tail oracle failed")
    verdict = params.detect(values)
    outcome = null_outcome(verdict, params.tol, params.window)
    if any(LIMIT_UNDETECTED in r.notes for r, _ in results):
        notes.append("inner limit over i inconclusive")
        outcome = Outcome.INCONCLUSIVE
    logger.info("%s(%s) %s under %s: %s", criterion.value, space.name, A.describe(),
                d.describe(), outcome.value)
    return CriterionReport(criterion, A.describe(), d.describe(), verdict.trace, verdict, outcome,
                           regime_note, space.name, tuple(notes))


def _zeta_image(A: InfiniteMatrix, d: DefermentSchedule):
    def image(n):
        return zeta_image_seq(A, d, n), A.zeta_regime(d, n)
    return image


def criterion_cA(A: InfiniteMatrix, d: DefermentSchedule, params: Optional[DetectParams] = None,
                 i_horizon: Optional[int] = None) -> CriterionReport:
    """Strong deferred conullity of c_A: sup_i |(1/(q-p)) sum_k tail(i, k)| -> 0."""
    params = params or DetectParams.for_criteria()
    return _null_trace(CriterionId.C_A_STRONG, C, A, d, _zeta_image(A, d), params, i_horizon)


def criterion_lA(A: InfiniteMatrix, d: DefermentSchedule, params: Optional[DetectParams] = None,
                 i_horizon: Optional[int] = None) -> CriterionReport:
    """Deferred conullity of l_A: sum_i |(1/(q-p)) sum_k tail(i, k)| -> 0."""
    params = params or DetectParams.for_criteria()
    return _null_trace(CriterionId.L1_A, L1, A, d, _zeta_image(A, d), params, i_horizon)


def criterion_bvA(A: InfiniteMatrix, d: DefermentSchedule, params: Optional[DetectParams] = None,
                  i_horizon: Optional[int] = None) -> CriterionReport:
    """Deferred conullity of bv_A: variation over i of the zeta image plus its limit in i."""
    params = params or DetectParams.for_criteria()
    return _null_trace(CriterionId.BV_A, BV, A, d, _zeta_image(A, d), params, i_horizon)


def zeta_image_test(Y: SpaceId, A: InfiniteMatrix, d: DefermentSchedule,
                    params: Optional[DetectParams] = None,
                    i_horizon: Optional[int] = None) -> CriterionReport:
    """||A zeta^n||_Y -> 0 for any of c, c0, l, bv, bv0, l_infinity."""
    params = params or DetectParams.for_criteria()
    return _null_trace(CriterionId.ZETA_IMAGE, Y, A, d, _zeta_image(A, d), params, i_horizon)


def criterion_wedge(Y: SpaceId, A: InfiniteMatrix, d: DefermentSchedule,
                    params: Optional[DetectParams] = None,
                    i_horizon: Optional[int] = None) -> CriterionReport:
    """Deferred wedge property of Y_A: ||A[(1/(q-p)) sum_k delta^k]||_Y -> 0."""
    params = params or DetectParams.for_criteria()

    def image(n):
        _, q = d.window(n)
        return transform(A, deferred_wedge_elem(d, n)), A.regime(q + 1, 0.0)

    return _null_trace(CriterionId.WEDGE, Y, A, d, image, params, i_horizon)


def _section_image(A: InfiniteMatrix, z: Seq, d: DefermentSchedule, n: int) -> tuple[Seq, Optional[RowRegime]]:
    """Az - (1/(q-p)) sum_{k=p+1}^{q} Az^(k), from the partial row sums P_i(k) = sum_{j<=k} a_ij z_j."""
    p, q = d.window(n)
    m = q - p
    window = np.arange(p + 1, q + 1)
    weighted = product(z, zeta(d, n))
    eventual = weighted.tail.eventual_value()
    regime = A.regime(weighted.tail.start, eventual) if eventual is not None else None

    def coordinate(i):
        support = A.row_support(i)
        if support is None:
            return transform(A, weighted).at(i)
        if support == 0:
            return 0.0
        sums = PrefixSums(A.row(i, support) * z.values(1, support))
        full = sums.prefix(support)
        averaged = compensated_sum(sums.prefix(np.minimum(window, support))) / m
        return full - averaged

    def block(lo, hi):
        return np.array([coordinate(i) for i in range(lo, hi + 1)])

    tail = regime.tail() if regime is not None else Tail.unknown()
    return Seq(coordinate, tail, f"section[{A.describe()}]({z.name})^{n}", None, block), regime


def section_test(Y: SpaceId, A: InfiniteMatrix, z: Seq, d: DefermentSchedule,
                 params: Optional[DetectParams] = None,
                 i_horizon: Optional[int] = None) -> CriterionReport:
    """Is z in the strong deferred section space of Y_A?

    T_n = ||Az - (1/(q-p)) sum_k Az^(k)||_Y; with z = e this is the zeta
    image criterion for Y computed along an independent path.
    """
    params = params or DetectParams.for_criteria()
    return _null_trace(CriterionId.SECTION_TEST, Y, A, d,
                       lambda n: _section_image(A, z, d, n), params, i_horizon)


def _rows_for(A: InfiniteMatrix, d: DefermentSchedule, n: int,
              i_horizon: Optional[int]) -> tuple[Optional[int], Optional[RowRegime]]:
    regime = A.zeta_regime(d, n)
    if regime is not None:
        return regime.settle, regime
    return i_horizon, None


def _linf_bound_part(A, d, params, i_horizon) -> CriterionReport:
    """sup_{i, n'<=n} |(1/(q-p)) sum_k sum_{j<=k} a_ij| as a running trace; holds when bounded."""
    criterion = CriterionId.LINF_A_BOUND

    def term(n):
        rows, regime = _rows_for(A, d, n, i_horizon)
        if rows is None:
            return None
        p, q = d.window(n)
        idx = np.arange(1, rows + 1)
        sums = np.array([A.row_tail(int(i), 0) for i in idx])
        value = float(np.abs(sums - A.tail_averages(idx, p, q)).max())
        row_limit = A.row_sum_limit()
        if regime is not None and row_limit is not None:
            value = max(value, abs(row_limit - regime.limit))
        return value

    values = parallel_map(term, range(1, params.horizon + 1))
    if any(v is None for v in values):
        return _inconclusive(criterion, A, d, None, params, "no row regime for this matrix")
    running = np.maximum.accumulate(np.array(values))
    verdict = params.detect(running)
    outcome = limit_outcome(verdict)
    return CriterionReport(criterion, A.describe(), d.describe(), verdict.trace, verdict, outcome,
                           "running sup over the row regime")


def _subsequence_value(A, d, ns: np.ndarray, lengths: Sequence[int],
                       i_horizon: Optional[int]) -> Optional[list[float]]:
    """sup_i min_{s<=L} |(A zeta^{n_s})_i| for each L."""
    plans = [_rows_for(A, d, int(n), i_horizon) for n in ns]
    if any(rows is None for rows, _ in plans):
        return None
    rows = max(r for r, _ in plans)
    idx = np.arange(1, rows + 1)
    grid = np.abs(np.vstack([A.tail_averages(idx, *d.window(int(n))) for n in ns]))
    limits = [abs(reg.limit) for _, reg in plans if reg is not None]
    out = []
    for length in lengths:
        value = float(grid[:length].min(axis=0).max())
        if len(limits) == len(plans):
            value = max(value, min(limits[:length]))
        out.append(value)
    return out


def _linf_min_part(A, d, params, i_horizon, epsilons, lengths, samples, seed) -> CriterionReport:
    """Sampled falsifier: for every epsilon and sampled subsequence some L gives a value below epsilon."""
    criterion = CriterionId.LINF_A_MIN
    lengths = sorted(lengths)
    top = lengths[-1]
    if top > params.horizon:
        raise ValueError(f"subsequence length {top} exceeds horizon {params.horizon}")
    rng = np.random.default_rng(seed)
    subsequences = [np.sort(rng.choice(np.arange(1, params.horizon + 1), size=top, replace=False))
                    for _ in range(samples)]
    results = parallel_map(lambda ns: _subsequence_value(A, d, ns, lengths, i_horizon), subsequences)
    if any(r is None for r in results):
        return _inconclusive(criterion, A, d, None, params, "no row regime for this matrix")

    values = np.array(results)              # samples x lengths
    worst = values.max(axis=0)
    table = tuple((eps, length, float(w), bool(w < eps))
                  for eps in epsilons for length, w in zip(lengths, worst))
    # values are nonincreasing in L, so "some L works" is decided at the largest L
    holds = all(worst[-1] < eps for eps in epsilons)
    trace = tuple((s, float(v[-1])) for s, v in enumerate(results, start=1))
    status = VerdictStatus.CONVERGED if holds else VerdictStatus.DIVERGED
    note = "HoldsAtSample" if holds else "FalsifiedAtSample"
    verdict = ConvergenceVerdict(status, float(worst[-1]) if holds else None, float(worst[-1]),
                                 trace, min(epsilons), (note,))
    return CriterionReport(criterion, A.describe(), d.describe(), trace, verdict,
                           Outcome.HOLDS if holds else Outcome.FAILS,
                           f"{samples} subsequences, seed {seed}", None, (note,), (), table)


def criterion_linfA(A: InfiniteMatrix, d: DefermentSchedule, params: Optional[DetectParams] = None,
                    i_horizon: Optional[int] = None,
                    epsilons: Sequence[float] = config.LINF_EPSILONS,
                    lengths: Sequence[int] = config.LINF_LENGTHS,
                    samples: int = config.LINF_SAMPLES,
                    seed: int = config.LINF_SEED) -> CriterionReport:
    """Two-part criterion for (l_infinity)_A: a uniform bound, and the sampled min condition."""
    params = params or DetectParams.for_criteria()
    bound = _linf_bound_part(A, d, params, i_horizon)
    sampled = _linf_min_part(A, d, params, i_horizon, epsilons, lengths, samples, seed)
    outcomes = {bound.outcome, sampled.outcome}
    if Outcome.FAILS in outcomes:
        outcome = Outcome.FAILS
    elif Outcome.INCONCLUSIVE in outcomes:
        outcome = Outcome.INCONCLUSIVE
    else:
        outcome = Outcome.HOLDS
    logger.info("LINF_A %s under %s: %s", A.describe(), d.describe(), outcome.value)
    return CriterionReport(CriterionId.LINF_A, A.describe(), d.describe(), bound.trace,
                           bound.verdict, outcome, bound.regime, "linf",
                           bound.notes + sampled.notes, (bound, sampled), sampled.table)


@dataclass(frozen=True)
class Functional:
    """A continuous functional g on Y, seen through its values g(a^j) on the columns of A."""
    name: str
    on_column: Callable[[int], float]
    support: Optional[int] = None   # g(a^j) = 0 for j > support
    unknown: Optional[str] = None   # why g(a^j) cannot be evaluated, if it cannot

    def as_seq(self) -> Seq:
        """j -> g(a^j) as a sequence, eventually zero when the support is known."""
        tail = Tail.zero(self.support + 1) if self.support is not None else Tail.unknown()
        return Seq(self.on_column, tail, self.name)


@dataclass(frozen=True)
class FamilyVerdict:
    """Conjunction of membership verdicts over a family of functionals."""
    status: VerdictStatus
    members: tuple = ()   # (functional name, ConvergenceVerdict)

    @property
    def outcome(self) -> Outcome:
        return {VerdictStatus.CONVERGED: Outcome.HOLDS,
                VerdictStatus.DIVERGED: Outcome.FAILS}.get(self.status, Outcome.INCONCLUSIVE)


def _column_limits_unknown(A: InfiniteMatrix) -> Optional[str]:
    if A.column_limit(1) is None:
        return f"column limits of {A.describe()} unknown"
    return None


def _functional_member(g: Functional, z: Seq, d: DefermentSchedule,
                       params: DetectParams) -> ConvergenceVerdict:
    if g.unknown is not None:
        logger.warning("%s: %s", g.name, g.unknown)
        return ConvergenceVerdict(VerdictStatus.INCONCLUSIVE, None, math.inf, (), params.tol, (g.unknown,))
    return member_sigma_pq_s(product(z, g.as_seq()), d, params)


def domain_functionals(Y: SpaceId, A: InfiniteMatrix, rows: int) -> list[Functional]:
    """Coordinate functionals y -> y_i for i <= rows and, on c, the limit functional."""
    family = [Functional(f"coord[{i}]", lambda j, i=i: A.entry(i, j), A.row_support(i))
              for i in range(1, rows + 1)]
    if Y.tag is SpaceTag.C:
        if A.null_columns:
            family.append(Functional("lim", lambda j: 0.0, 0))
        else:
            family.append(Functional("lim", A.column_limit, unknown=_column_limits_unknown(A)))
    return family


def dF_plus_test(functionals: Sequence[Functional], z: Seq, d: DefermentSchedule,
                 params: Optional[DetectParams] = None) -> FamilyVerdict:
    """Is {z_j g(a^j)} in sigma_p^q[s] for every functional g of the family?"""
    params = params or DetectParams.for_membership()
    members = tuple((g.name, _functional_member(g, z, d, params)) for g in functionals)
    statuses = {v.status for _, v in members}
    if VerdictStatus.DIVERGED in statuses:
        status = VerdictStatus.DIVERGED
    elif VerdictStatus.INCONCLUSIVE in statuses:
        status = VerdictStatus.INCONCLUSIVE
    else:
        status = VerdictStatus.CONVERGED
    return FamilyVerdict(status, members)

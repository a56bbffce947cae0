"""Sequence spaces: truncated norms, sigma_p^q[s] membership, duals and the
sectional property sigma_p^q[K].

Norms are evaluated on a head x_1..x_N and closed off with the tail
descriptor when it allows; ``NormReport.exact`` says whether the remainder is
provably below EXACT_TOL.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

try:
    from . import config
    from .convergence import ConvergenceVerdict, DetectParams, VerdictStatus, still_falling
    from .sequences import (DefermentSchedule, Seq, TailKind, cesaro_schedule, deferred_mean,
                            partial_sums, product, zeta)
except ImportError:
    import config
    from convergence import ConvergenceVerdict, DetectParams, VerdictStatus, still_falling
    from sequences import (DefermentSchedule, Seq, TailKind, cesaro_schedule, deferred_mean,
                           partial_sums, product, zeta)

logger = logging.getLogger(__name__)

LIMIT_UNDETECTED = "limit term not detected"


class SpaceTag(Enum):
    C = "c"
    C0 = "c0"
    L1 = "l"
    BV = "bv"
    BV0 = "bv0"
    LINF = "linf"
    CS = "cs"
    SIGMA_PQ_S = "sigma"


@dataclass(frozen=True)
class SpaceId:
    """A sequence space; SIGMA_PQ_S carries its deferment schedule."""
    tag: SpaceTag
    schedule: Optional[DefermentSchedule] = None

    def __post_init__(self):
        if self.tag is SpaceTag.SIGMA_PQ_S and self.schedule is None:
            raise ValueError("sigma_p^q[s] needs a deferment schedule")

    @property
    def name(self) -> str:
        if self.tag is SpaceTag.SIGMA_PQ_S:
            return f"sigma[{self.schedule.describe()}]"
        return self.tag.value


C = SpaceId(SpaceTag.C)
C0 = SpaceId(SpaceTag.C0)
L1 = SpaceId(SpaceTag.L1)
BV = SpaceId(SpaceTag.BV)
BV0 = SpaceId(SpaceTag.BV0)
LINF = SpaceId(SpaceTag.LINF)
CS = SpaceId(SpaceTag.CS)

SPACES_BY_NAME = {
    "c": C, "c0": C0, "l": L1, "l1": L1, "bv": BV, "bv0": BV0, "linf": LINF, "cs": CS,
}


def sigma_pq_s(d: DefermentSchedule) -> SpaceId:
    return SpaceId(SpaceTag.SIGMA_PQ_S, d)


@dataclass(frozen=True)
class NormReport:
    """A truncated norm.

    Attributes:
        value: the norm (math.inf when the tail makes it infinite).
        exact: True when the truncation error is provably below EXACT_TOL.
        truncation: last index evaluated explicitly.
        notes: diagnostics.
    """
    value: float
    exact: bool
    truncation: int
    notes: tuple = ()


def _head_end(x: Seq, trunc: int) -> int:
    if x.tail.known:
        return max(trunc, x.tail.start - 1)
    return trunc


def _sup_norm(x: Seq, trunc: int) -> NormReport:
    end = _head_end(x, trunc)
    head = np.abs(x.values(1, end))
    sup = float(head.max()) if head.size else 0.0
    tail = x.tail
    if tail.kind is TailKind.EVENTUALLY_ZERO:
        return NormReport(sup, True, end)
    if tail.kind is TailKind.EVENTUALLY_CONSTANT:
        return NormReport(max(sup, abs(tail.value)), True, end)
    if tail.kind is TailKind.MONOTONE:
        edge = max(abs(x.at(tail.start)), abs(tail.value))
        return NormReport(max(sup, edge), True, end)
    if tail.kind is TailKind.ABS_BOUND:
        bound = tail.coefficient * tail.ratio ** (end + 1)
        return NormReport(sup, bound - sup < config.EXACT_TOL, end)
    return NormReport(sup, False, end, ("tail unknown",))


def _l1_norm(x: Seq, trunc: int) -> NormReport:
    end = _head_end(x, trunc)
    total = math.fsum(np.abs(x.values(1, end)).tolist())
    tail = x.tail
    if tail.kind is TailKind.EVENTUALLY_ZERO:
        return NormReport(total, True, end)
    if tail.kind in (TailKind.EVENTUALLY_CONSTANT, TailKind.MONOTONE):
        if tail.value != 0:
            return NormReport(math.inf, True, end, ("nonzero limit",))
        if tail.kind is TailKind.EVENTUALLY_CONSTANT:
            return NormReport(total, True, end)
        return NormReport(total, False, end, ("monotone null tail not summed",))
    if tail.kind is TailKind.ABS_BOUND:
        remainder = tail.coefficient * tail.ratio ** (end + 1) / (1.0 - tail.ratio)
        return NormReport(total, remainder < config.EXACT_TOL, end)
    return NormReport(total, False, end, ("tail unknown",))


def _bv_norm(x: Seq, trunc: int) -> NormReport:
    """sum_i |x_i - x_{i+1}| + lim_i |x_i|."""
    end = max(_head_end(x, trunc), 1)
    head = x.values(1, end)
    variation = math.fsum(np.abs(np.diff(head)).tolist())
    tail = x.tail
    last = head[-1]
    eventual = tail.eventual_value()
    if eventual is not None:
        value = variation + abs(last - eventual) + abs(eventual)
        return NormReport(value, True, end)
    if tail.kind is TailKind.MONOTONE:
        nxt = x.at(end + 1)
        value = variation + abs(last - nxt) + abs(nxt - tail.value) + abs(tail.value)
        return NormReport(value, True, end)
    if tail.kind is TailKind.ABS_BOUND:
        bound = 2.0 * tail.coefficient * tail.ratio ** end / (1.0 - tail.ratio)
        return NormReport(variation, bound < config.EXACT_TOL, end)
    # |x_end| stands in for the limit term, so the value is nondecreasing in trunc
    notes = ("tail unknown",)
    window = min(config.DETECT_WINDOW, end)
    detector = DetectParams(tol=config.MEMBER_TOL, window=window, horizon=end)
    if window < 2 or not detector.detect(head).converged:
        notes += (LIMIT_UNDETECTED,)
    return NormReport(variation + abs(last), False, end, notes)


def _cs_norm(x: Seq, trunc: int) -> NormReport:
    end = _head_end(x, trunc)
    sums = np.abs(partial_sums(x).values(1, end))
    sup = float(sums.max()) if sums.size else 0.0
    tail = x.tail
    if tail.kind is TailKind.EVENTUALLY_ZERO:
        return NormReport(sup, True, end)
    if tail.kind is TailKind.EVENTUALLY_CONSTANT:
        return NormReport(math.inf, True, end, ("partial sums unbounded",))
    if tail.kind is TailKind.ABS_BOUND:
        remainder = tail.coefficient * tail.ratio ** (end + 1) / (1.0 - tail.ratio)
        return NormReport(sup, remainder < config.EXACT_TOL, end)
    return NormReport(sup, False, end, ("tail unknown",))


def _sigma_norm(x: Seq, d: DefermentSchedule, trunc: int) -> NormReport:
    """sup_n |(D_{p,q} S x)_n| over n <= trunc."""
    means = np.abs(deferred_mean(partial_sums(x), d).values(1, trunc))
    sup = float(means.max())
    exact = False
    if x.tail.kind is TailKind.EVENTUALLY_ZERO:
        # deferred means of S x never exceed max_k |S_k|, attained before the tail
        ceiling = float(np.abs(partial_sums(x).values(1, x.tail.start)).max())
        exact = ceiling - sup < config.EXACT_TOL
    return NormReport(sup, exact, trunc)


def norm(space: SpaceId, x: Seq, trunc: int = config.DEFAULT_TRUNC) -> NormReport:
    """Norm of x in the given space, truncated at ``trunc`` (or the tail start)."""
    if trunc < 1:
        raise ValueError(f"trunc must be >= 1, got {trunc}")
    tag = space.tag
    if tag in (SpaceTag.C, SpaceTag.C0, SpaceTag.LINF):
        return _sup_norm(x, trunc)
    if tag is SpaceTag.L1:
        return _l1_norm(x, trunc)
    if tag in (SpaceTag.BV, SpaceTag.BV0):
        return _bv_norm(x, trunc)
    if tag is SpaceTag.CS:
        return _cs_norm(x, trunc)
    return _sigma_norm(x, space.schedule, trunc)


def member_sigma_pq_s(x: Seq, d: DefermentSchedule,
                      params: Optional[DetectParams] = None) -> ConvergenceVerdict:
    """Does lim_n (D_{p,q} S x)_n exist?"""
    params = params or DetectParams.for_membership()
    verdict = params.detect(deferred_mean(partial_sums(x), d))
    logger.debug("sigma[%s] membership of %s: %s", d.describe(), x.name, verdict.status.value)
    return verdict


def d_dual_test(x: Seq, y: Seq, d: DefermentSchedule,
                params: Optional[DetectParams] = None) -> ConvergenceVerdict:
    """Is x.y in sigma_p^q[s]?"""
    return member_sigma_pq_s(product(x, y), d, params)


def sigma_dual_test(x: Seq, y: Seq, params: Optional[DetectParams] = None) -> ConvergenceVerdict:
    """d_dual_test with the Cesaro schedule p = 0, q(n) = n."""
    return d_dual_test(x, y, cesaro_schedule(), params)


def sectional_residual(x: Seq, d: DefermentSchedule, n: int) -> Seq:
    """x - (1/(q-p)) sum_{k=p+1}^{q} x^(k), which is x.zeta^n coordinatewise."""
    return product(x, zeta(d, n))


def sigma_pq_K_test(space: SpaceId, x: Seq, d: DefermentSchedule,
                    params: Optional[DetectParams] = None,
                    trunc: int = config.DEFAULT_TRUNC) -> ConvergenceVerdict:
    """Do the deferred averages of the sections of x converge to x in the space?

    The trace is T_n = ||x.zeta^n||; holds when it converges to 0.
    """
    if space.tag is SpaceTag.SIGMA_PQ_S:
        raise ValueError("sigma_p^q[K] is tested in c, c0, l, bv or l_infinity")
    params = params or DetectParams.for_criteria()
    inexact = 0

    def term(n):
        nonlocal inexact
        _, q = d.window(n)
        report = norm(space, sectional_residual(x, d, n), max(trunc, q + 1))
        if not report.exact:
            inexact += 1
        return report.value

    verdict = params.detect(term)
    if inexact:
        verdict = verdict.with_notes(f"{inexact} inexact norm evaluations")
    if verdict.status is VerdictStatus.CONVERGED and abs(verdict.limit) >= params.tol:
        if still_falling(verdict, params.window):
            verdict = verdict.with_notes("trace still falling toward 0 at the horizon")
        else:
            verdict = verdict.with_notes("trace converges to a nonzero value")
    return verdict

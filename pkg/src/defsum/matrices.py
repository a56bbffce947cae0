"""Infinite matrices with row-tail oracles, the transform Ax and summability
domains Y_A.

Every catalog matrix has finite row support, closed-form row tails
tail(i, k) = sum_{j>k} a_ij, and a row regime: given an input that is
constant from some index on, the row index beyond which (Au)_i is exactly
its limit, or moves monotonically toward it. The regime is what turns a
sup or sum over all rows i into a finite computation.
"""

import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

try:
    from . import config
    from .convergence import ConvergenceVerdict, DetectParams, VerdictStatus
    from .errors import TailOracleError
    from .sequences import DefermentSchedule, Seq, Tail, TailKind
    from .spaces import SpaceId, SpaceTag
    from .summation import PrefixSums, compensated_sum
except ImportError:
    import config
    from convergence import ConvergenceVerdict, DetectParams, VerdictStatus
    from errors import TailOracleError
    from sequences import DefermentSchedule, Seq, Tail, TailKind
    from spaces import SpaceId, SpaceTag
    from summation import PrefixSums, compensated_sum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RowBound:
    """Declared bound |a_ij| <= coefficient * ratio**j, uniform in i."""
    coefficient: float
    ratio: float


@dataclass(frozen=True)
class RowRegime:
    """Rows i >= settle equal ``limit`` (exact) or approach it monotonically."""
    settle: int
    limit: float
    exact: bool
    note: str = ""

    def tail(self) -> Tail:
        if self.exact:
            return Tail.zero(self.settle) if self.limit == 0 else Tail.constant(self.settle, self.limit)
        if isinstance(self.limit, complex):
            return Tail.unknown()
        return Tail.monotone(self.settle, self.limit)

    def describe(self) -> str:
        """Regime note carried into criterion reports."""
        kind = "exact" if self.exact else "monotone"
        text = f"rows settle at i={self.settle} ({kind}, limit {self.limit:g})"
        return f"{text}; {self.note}" if self.note else text


@dataclass(frozen=True)
class RowValue:
    """(Ax)_i together with a bound on its truncation error."""
    value: complex
    error_bound: float

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.error_bound)


def _zeta_weights(upto: int, p: int, m: int) -> np.ndarray:
    return np.clip(np.arange(1, upto + 1) - p - 1, 0, m) / m


def _ramp_totals(t, p: int, m: int) -> np.ndarray:
    """sum_{j=1}^{t} clamp(j - p - 1, 0, m), vectorized over t."""
    r = np.maximum(np.asarray(t, dtype=np.int64) - p - 1, 0)
    lin = np.minimum(r, m)
    return lin * (lin + 1) // 2 + np.maximum(r - m, 0) * m


class InfiniteMatrix:
    """A = (a_ij), i, j >= 1, given by an entry rule.

    Subclasses override the closed forms; a bare instance needs either a
    row_support (finite rows) or a RowBound for the numeric tail fallback.
    ``null_columns`` declares that every column tends to 0.
    """

    null_columns = False

    def __init__(self, entry: Optional[Callable[[int, int], float]] = None,
                 row_tail: Optional[Callable[[int, int], float]] = None,
                 row_bound: Optional[RowBound] = None,
                 row_support: Optional[Callable[[int], int]] = None,
                 name: str = "custom", params: tuple = ()):
        self._entry = entry
        self._row_tail = row_tail
        self._row_support = row_support
        self.row_bound = row_bound
        self.name = name
        self.params = tuple(params)

    def describe(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}({args})"

    def entry(self, i: int, j: int) -> float:
        """a_ij for i, j >= 1."""
        if self._entry is None:
            raise NotImplementedError(f"{self.name} has no entry rule")
        return self._entry(i, j)

    def row_support(self, i: int) -> Optional[int]:
        """Last column with a possibly nonzero entry in row i, or None for infinite rows."""
        if self._row_support is None:
            return None
        return self._row_support(i)

    def row(self, i: int, upto: int) -> np.ndarray:
        """Entries a_i1 .. a_i,upto."""
        return np.array([self.entry(i, j) for j in range(1, upto + 1)], dtype=float)

    def row_tail(self, i: int, k: int) -> float:
        """sum_{j>k} a_ij."""
        if self._row_tail is not None:
            return self._row_tail(i, k)
        support = self.row_support(i)
        if support is not None:
            return compensated_sum(self.row(i, support)[k:]) if k < support else 0.0
        return self._numeric_tail(i, k)

    def _numeric_tail(self, i: int, k: int) -> float:
        bound = self.row_bound
        if bound is None:
            raise TailOracleError(f"{self.name}: infinite row {i} without a declared row bound")
        if not 0.0 <= bound.ratio < 1.0:
            raise TailOracleError(f"{self.name}: row bound ratio {bound.ratio} is not geometric")
        if bound.ratio == 0.0 or bound.coefficient == 0.0:
            return 0.0
        # stop once C r^(J+1) / (1 - r) < TAIL_EPS
        target = config.TAIL_EPS * (1.0 - bound.ratio) / bound.coefficient
        last = max(k, math.ceil(math.log(target) / math.log(bound.ratio)))
        return compensated_sum(self.entry(i, j) for j in range(k + 1, last + 1))

    def row_sum_limit(self) -> Optional[float]:
        """lim_i sum_j a_ij, when known."""
        return None

    def column_limit(self, j: int) -> Optional[float]:
        """lim_i a_ij, when known."""
        return 0.0 if self.null_columns else None

    def column_limit_total(self) -> Optional[float]:
        """sum_j lim_i a_ij, when known."""
        return 0.0 if self.null_columns else None

    def regime(self, start: int, value: float) -> Optional[RowRegime]:
        """Row regime for inputs u with u_j = value for every j >= start."""
        return None

    def zeta_regime(self, d: DefermentSchedule, n: int) -> Optional[RowRegime]:
        """Row regime of A applied to zeta^n, which is 1 from q(n) + 1 on."""
        _, q = d.window(n)
        return self.regime(q + 1, 1.0)

    def tail_averages(self, rows: np.ndarray, p: int, q: int) -> np.ndarray:
        """(1/(q-p)) sum_{k=p+1}^{q} tail(i, k) for each row i.

        Computed as sum_{j<=q} a_ij (j-p-1)^+/(q-p) + tail(i, q).
        """
        m = q - p
        out = np.empty(len(rows))
        for idx, i in enumerate(np.asarray(rows).tolist()):
            support = self.row_support(i)
            upto = q if support is None else min(q, support)
            try:
                head = compensated_sum(self.row(i, upto) * _zeta_weights(upto, p, m))
                out[idx] = head + self.row_tail(i, q)
            except TailOracleError as exc:
                logger.warning("row %d flagged: %s", i, exc)
                out[idx] = math.nan
        return out

    def check_consistency(self, rows: int, cols: int) -> float:
        """max |a_{i,k+1} + tail(i, k+1) - tail(i, k)| over i <= rows, 0 <= k < cols."""
        worst = 0.0
        for i in range(1, rows + 1):
            for k in range(cols):
                gap = self.entry(i, k + 1) + self.row_tail(i, k + 1) - self.row_tail(i, k)
                worst = max(worst, abs(gap))
        return worst


class Identity(InfiniteMatrix):
    null_columns = True

    def __init__(self):
        super().__init__(name="identity")

    def entry(self, i, j):
        return 1.0 if i == j else 0.0

    def row_support(self, i):
        return i

    def row(self, i, upto):
        out = np.zeros(upto)
        if i <= upto:
            out[i - 1] = 1.0
        return out

    def row_tail(self, i, k):
        return 1.0 if i > k else 0.0

    def row_sum_limit(self):
        return 1.0

    def regime(self, start, value):
        return RowRegime(start, value, True)

    def tail_averages(self, rows, p, q):
        return np.clip(np.asarray(rows) - p - 1, 0, q - p) / (q - p)


class CesaroC1(InfiniteMatrix):
    """a_ij = 1/i for j <= i."""
    null_columns = True

    def __init__(self):
        super().__init__(name="cesaro")

    def entry(self, i, j):
        return 1.0 / i if j <= i else 0.0

    def row_support(self, i):
        return i

    def row(self, i, upto):
        out = np.zeros(upto)
        out[: min(i, upto)] = 1.0 / i
        return out

    def row_tail(self, i, k):
        return (i - k) / i if k < i else 0.0

    def row_sum_limit(self):
        return 1.0

    def regime(self, start, value):
        return RowRegime(start, value, False, "row means approach the limit monotonically")

    def tail_averages(self, rows, p, q):
        rows = np.asarray(rows, dtype=float)
        m = q - p
        upper = np.minimum(q, rows - 1)
        count = np.maximum(upper - p, 0)
        return count * (rows - (p + 1 + upper) / 2.0) / (m * rows)


class Difference(InfiniteMatrix):
    """a_ii = 1, a_i,i+1 = -1."""
    null_columns = True

    def __init__(self):
        super().__init__(name="difference")

    def entry(self, i, j):
        if j == i:
            return 1.0
        if j == i + 1:
            return -1.0
        return 0.0

    def row_support(self, i):
        return i + 1

    def row(self, i, upto):
        out = np.zeros(upto)
        if i <= upto:
            out[i - 1] = 1.0
        if i + 1 <= upto:
            out[i] = -1.0
        return out

    def row_tail(self, i, k):
        return -1.0 if k == i else 0.0

    def row_sum_limit(self):
        return 0.0

    def regime(self, start, value):
        return RowRegime(start, 0.0, True)

    def tail_averages(self, rows, p, q):
        rows = np.asarray(rows)
        return np.where((rows > p) & (rows <= q), -1.0 / (q - p), 0.0)


class Zweier(InfiniteMatrix):
    """a_ii = alpha, a_i,i-1 = 1 - alpha."""
    null_columns = True

    def __init__(self, alpha: float = 0.5):
        super().__init__(name="zweier", params=(("alpha", alpha),))
        self.alpha = float(alpha)

    def entry(self, i, j):
        if j == i:
            return self.alpha
        if j == i - 1:
            return 1.0 - self.alpha
        return 0.0

    def row_support(self, i):
        return i

    def row(self, i, upto):
        out = np.zeros(upto)
        if i <= upto:
            out[i - 1] = self.alpha
        if 2 <= i <= upto + 1:
            out[i - 2] = 1.0 - self.alpha
        return out

    def row_tail(self, i, k):
        if k <= i - 2:
            return 1.0
        if k == i - 1:
            return self.alpha
        return 0.0

    def row_sum_limit(self):
        return 1.0

    def regime(self, start, value):
        return RowRegime(start + 1, value, True)

    def tail_averages(self, rows, p, q):
        rows = np.asarray(rows)
        m = q - p
        below = np.clip(rows - 2 - p, 0, m)
        edge = ((rows - 1 >= p + 1) & (rows - 1 <= q)) * self.alpha
        return (below + edge) / m


class ShiftLeft(InfiniteMatrix):
    """a_i,i+1 = 1, so (Ax)_i = x_{i+1}."""
    null_columns = True

    def __init__(self):
        super().__init__(name="shift-left")

    def entry(self, i, j):
        return 1.0 if j == i + 1 else 0.0

    def row_support(self, i):
        return i + 1

    def row(self, i, upto):
        out = np.zeros(upto)
        if i + 1 <= upto:
            out[i] = 1.0
        return out

    def row_tail(self, i, k):
        return 1.0 if k <= i else 0.0

    def row_sum_limit(self):
        return 1.0

    def regime(self, start, value):
        return RowRegime(max(start - 1, 1), value, True)

    def tail_averages(self, rows, p, q):
        return np.clip(np.asarray(rows) - p, 0, q - p) / (q - p)


class DeferredMeanMatrix(InfiniteMatrix):
    """Row n carries 1/(q(n)-p(n)) on columns p(n)+1..q(n)."""
    null_columns = True

    def __init__(self, schedule: DefermentSchedule):
        super().__init__(name="deferred-mean", params=(("schedule", schedule.describe()),))
        self.schedule = schedule

    def entry(self, i, j):
        p, q = self.schedule.window(i)
        return 1.0 / (q - p) if p < j <= q else 0.0

    def row_support(self, i):
        return self.schedule.window(i)[1]

    def row(self, i, upto):
        p, q = self.schedule.window(i)
        out = np.zeros(upto)
        out[p: min(q, upto)] = 1.0 / (q - p)
        return out

    def row_tail(self, i, k):
        p, q = self.schedule.window(i)
        return min(max(q - max(k, p), 0), q - p) / (q - p)

    def row_sum_limit(self):
        return 1.0

    def _first_row(self, reaches: Callable[[int], bool]) -> Optional[int]:
        """Smallest i with reaches(i), assuming reaches is monotone in i."""
        hi = 1
        while not reaches(hi):
            if hi >= config.SETTLE_SEARCH_LIMIT:
                return None
            hi = min(hi * 2, config.SETTLE_SEARCH_LIMIT)
        lo = hi // 2 + 1 if hi > 1 else 1
        while lo < hi:
            mid = (lo + hi) // 2
            if reaches(mid):
                hi = mid
            else:
                lo = mid + 1
        return hi

    def regime(self, start, value):
        note = "assumes p(i), q(i) nondecreasing"
        settle = self._first_row(lambda i: self.schedule.p(i) >= start - 1)
        if settle is not None:
            return RowRegime(settle, value, True, note)
        settle = self._first_row(lambda i: self.schedule.q(i) >= start - 1)
        if settle is None:
            return None
        return RowRegime(settle, value, False, note)

    def tail_averages(self, rows, p, q):
        m = q - p
        lower, upper = self.schedule.bounds(int(np.min(rows)), int(np.max(rows)))
        offset = np.asarray(rows) - int(np.min(rows))
        lower, upper = lower[offset], upper[offset]
        total = _ramp_totals(upper, p, m) - _ramp_totals(lower, p, m)
        return total / m / (upper - lower)


class WeightedMean(InfiniteMatrix):
    """a_ij = w_j / (w_1 + ... + w_i) for j <= i, positive weights."""
    null_columns = True

    def __init__(self, weights: Seq):
        super().__init__(name="weighted-mean", params=(("weights", weights.name),))
        self.weights = weights
        self._lock = threading.Lock()
        self._w = np.zeros(0)
        self._prefix = PrefixSums(np.zeros(0))

    def _cumulative(self, upto: int) -> tuple[np.ndarray, PrefixSums]:
        with self._lock:
            if upto > self._w.shape[0]:
                size = max(upto, 2 * self._w.shape[0])
                w = self.weights.values(1, size)
                if np.any(w <= 0):
                    raise ValueError(f"{self.weights.name}: weights must be positive")
                self._w = w
                self._prefix = PrefixSums(w)
            return self._w, self._prefix

    def _total(self, i: int) -> float:
        _, prefix = self._cumulative(i)
        return float(prefix.prefix(i))

    def entry(self, i, j):
        if j > i:
            return 0.0
        w, _ = self._cumulative(i)
        return float(w[j - 1]) / self._total(i)

    def row_support(self, i):
        return i

    def row(self, i, upto):
        w, _ = self._cumulative(i)
        out = np.zeros(upto)
        stop = min(i, upto)
        out[:stop] = w[:stop] / self._total(i)
        return out

    def row_tail(self, i, k):
        if k >= i:
            return 0.0
        _, prefix = self._cumulative(i)
        return float(prefix.window(k + 1, i)) / self._total(i)

    def row_sum_limit(self):
        return 1.0

    def regime(self, start, value):
        return RowRegime(start, value, False, "weighted means approach the limit monotonically")

    def tail_averages(self, rows, p, q):
        rows = np.asarray(rows)
        top = int(rows.max())
        w, prefix = self._cumulative(top)
        weighted = PrefixSums(w[:top] * _zeta_weights(top, p, q - p))
        return weighted.prefix(rows) / prefix.prefix(rows)


class UserTable(InfiniteMatrix):
    """Finite explicit table; rows and columns outside it are zero."""
    null_columns = True

    def __init__(self, rows: Sequence[Sequence[float]], name: str = "table"):
        table = tuple(tuple(float(v) for v in row) for row in rows)
        super().__init__(name=name, params=(("rows", len(table)),) if table else ())
        self.table = table

    def entry(self, i, j):
        if i > len(self.table):
            return 0.0
        row = self.table[i - 1]
        return row[j - 1] if j <= len(row) else 0.0

    def row_support(self, i):
        return len(self.table[i - 1]) if i <= len(self.table) else 0

    def row(self, i, upto):
        out = np.zeros(upto)
        if i <= len(self.table):
            row = self.table[i - 1][:upto]
            out[: len(row)] = row
        return out

    def row_tail(self, i, k):
        if i > len(self.table):
            return 0.0
        return math.fsum(self.table[i - 1][k:])

    def row_sum_limit(self):
        return 0.0

    def regime(self, start, value):
        return RowRegime(len(self.table) + 1, 0.0, True)


def zero_matrix() -> UserTable:
    """The zero matrix: an empty user table."""
    return UserTable((), name="zero")


def power_weights(power: float) -> Seq:
    """w_j = j^power."""
    def block(lo, hi):
        return np.arange(lo, hi + 1, dtype=float) ** power

    return Seq(lambda j: float(j) ** power, Tail.unknown(), f"j^{power:g}", None, block)


MATRIX_CATALOG = {
    "identity": Identity,
    "cesaro": CesaroC1,
    "difference": Difference,
    "zweier": Zweier,
    "shift-left": ShiftLeft,
    "deferred-mean": DeferredMeanMatrix,
    "weighted-mean": WeightedMean,
    "table": UserTable,
    "zero": zero_matrix,
}


class _ValueCache:
    """x_1..x_N, extended by doubling, shared across row evaluations."""

    def __init__(self, x: Seq):
        self._x = x
        self._values = np.zeros(0)
        self._lock = threading.Lock()

    def upto(self, n: int) -> np.ndarray:
        with self._lock:
            if n > self._values.shape[0]:
                self._values = self._x.values(1, max(n, 2 * self._values.shape[0]))
            return self._values[:n]


def apply_row(A: InfiniteMatrix, x: Seq, i: int, trunc: int = config.DEFAULT_TRUNC,
              cache: Optional[_ValueCache] = None) -> RowValue:
    """(Ax)_i = sum_j a_ij x_j with a bound on the truncation error."""
    cache = cache or _ValueCache(x)
    support = A.row_support(i)
    if support is not None:
        if support == 0:
            return RowValue(0.0, 0.0)
        return RowValue(compensated_sum(A.row(i, support) * cache.upto(support)), 0.0)

    if x.tail.kind is TailKind.EVENTUALLY_ZERO:
        end = x.tail.start - 1
        if end == 0:
            return RowValue(0.0, 0.0)
        return RowValue(compensated_sum(A.row(i, end) * cache.upto(end)), 0.0)

    end = trunc
    value = compensated_sum(A.row(i, end) * cache.upto(end))
    x_bound = x.tail.bound_after(end)
    if A.row_bound is None or x_bound is None:
        return RowValue(value, math.inf)
    rb = A.row_bound
    row_rest = rb.coefficient * rb.ratio ** (end + 1) / (1.0 - rb.ratio)
    return RowValue(value, x_bound * row_rest)


def _image_tail(A: InfiniteMatrix, x: Seq) -> Tail:
    eventual = x.tail.eventual_value()
    if eventual is None:
        return Tail.unknown()
    regime = A.regime(x.tail.start, eventual)
    return regime.tail() if regime is not None else Tail.unknown()


def transform(A: InfiniteMatrix, x: Seq, horizon: Optional[int] = None,
              trunc: int = config.DEFAULT_TRUNC) -> Seq:
    """y = Ax, row by row; the tail comes from A's row regime when x is eventually constant."""
    cache = _ValueCache(x)
    if horizon:
        supports = [A.row_support(i) for i in (1, horizon)]
        if all(s is not None for s in supports):
            cache.upto(max(supports))

    def rule(i):
        return apply_row(A, x, i, trunc, cache).value

    def block(lo, hi):
        return np.array([apply_row(A, x, i, trunc, cache).value for i in range(lo, hi + 1)])

    return Seq(rule, _image_tail(A, x), f"{A.describe()}({x.name})", None, block)


def zeta_image_seq(A: InfiniteMatrix, d: DefermentSchedule, n: int) -> Seq:
    """A.zeta^n through the tail identity (A zeta^n)_i = (1/(q-p)) sum_{k=p+1}^{q} tail(i, k)."""
    p, q = d.window(n)
    regime = A.zeta_regime(d, n)
    tail = regime.tail() if regime is not None else Tail.unknown()

    def rule(i):
        return float(A.tail_averages(np.array([i]), p, q)[0])

    def block(lo, hi):
        return A.tail_averages(np.arange(lo, hi + 1), p, q)

    return Seq(rule, tail, f"{A.describe()}.zeta^{n}", None, block)


def domain_member(Y: SpaceId, A: InfiniteMatrix, x: Seq,
                  params: Optional[DetectParams] = None,
                  trunc: int = config.DEFAULT_TRUNC) -> ConvergenceVerdict:
    """Is x in Y_A = {x : Ax exists and Ax in Y}, at truncation?

    Norm-defined spaces are decided on the accumulated norm of the first
    rows: running sum of |y_i| for l, running variation for bv, running sup
    for l_infinity, running partial sum for cs.
    """
    params = params or DetectParams.for_membership()
    horizon = params.horizon
    cache = _ValueCache(x)
    rows = [apply_row(A, x, i, trunc, cache) for i in range(1, horizon + 1)]
    unbounded = [i for i, r in enumerate(rows, start=1) if not r.bounded]
    if unbounded:
        logger.warning("%s: %d rows of %s have no error bound", A.describe(), len(unbounded), x.name)
        return ConvergenceVerdict(VerdictStatus.INCONCLUSIVE, None, math.inf, (), params.tol,
                                  (f"Ax not established: row {unbounded[0]} has no error bound",))
    y = np.array([r.value for r in rows])
    if not np.iscomplexobj(y) or not np.any(y.imag):
        y = y.real.astype(float)

    tag = Y.tag
    if tag in (SpaceTag.C, SpaceTag.C0):
        verdict = params.detect(y)
        if tag is SpaceTag.C0 and verdict.converged and abs(verdict.limit) >= params.tol:
            return ConvergenceVerdict(VerdictStatus.DIVERGED, None, verdict.residual, verdict.trace,
                                      params.tol, (f"Ax converges to {verdict.limit:g}, not to 0",))
        return verdict
    if tag is SpaceTag.L1:
        return params.detect(PrefixSums(np.abs(y)).prefix(np.arange(1, horizon + 1)))
    if tag in (SpaceTag.BV, SpaceTag.BV0):
        variation = PrefixSums(np.abs(np.diff(y))).prefix(np.arange(1, horizon))
        verdict = DetectParams(params.tol, params.window, horizon - 1, params.divergence_bound,
                               params.oscillation_factor).detect(variation)
        if tag is SpaceTag.BV0 and verdict.converged:
            limit = params.detect(y)
            if not limit.converged or abs(limit.limit) >= params.tol:
                return ConvergenceVerdict(VerdictStatus.DIVERGED, None, verdict.residual,
                                          verdict.trace, params.tol, ("Ax is not null",))
        return verdict
    if tag is SpaceTag.LINF:
        return params.detect(np.maximum.accumulate(np.abs(y)))
    if tag is SpaceTag.CS:
        return params.detect(PrefixSums(y).prefix(np.arange(1, horizon + 1)))
    raise ValueError(f"summability domains over {Y.name} are not supported")


def characteristic(A: InfiniteMatrix) -> Optional[float]:
    """lim_i sum_j a_ij - sum_j lim_i a_ij, when both limits are known."""
    rows, cols = A.row_sum_limit(), A.column_limit_total()
    if rows is None or cols is None:
        return None
    return rows - cols


def classify(A: InfiniteMatrix) -> str:
    """'conull' (characteristic 0), 'coregular', or 'unknown'."""
    chi = characteristic(A)
    if chi is None:
        return "unknown"
    return "conull" if abs(chi) < config.EXACT_TOL else "coregular"

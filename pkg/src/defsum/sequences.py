"""Lazy scalar sequences, deferment schedules and deferred Cesaro means.

Indexing is 1-based throughout: ``x.at(1)`` is the first coordinate, and a
schedule's window for row n is k = p(n)+1 .. q(n).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np

try:
    from . import config
    from .errors import ScheduleError
    from .summation import PrefixSums, compensated_sum
except ImportError:
    import config
    from errors import ScheduleError
    from summation import PrefixSums, compensated_sum

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]


class TailKind(Enum):
    """What is known about a sequence beyond some index."""
    EVENTUALLY_ZERO = "eventually-zero"
    EVENTUALLY_CONSTANT = "eventually-constant"
    ABS_BOUND = "abs-bound"        # |x_j| <= coefficient * ratio**j
    MONOTONE = "monotone"          # real, monotone, converging to value
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Tail:
    """Tail descriptor, valid for j >= start."""
    kind: TailKind = TailKind.UNKNOWN
    start: int = 1
    value: Scalar = 0.0
    ratio: float = 0.0
    coefficient: float = 0.0

    @classmethod
    def zero(cls, start: int) -> "Tail":
        """x_j = 0 for j >= start."""
        return cls(TailKind.EVENTUALLY_ZERO, max(int(start), 1), 0.0)

    @classmethod
    def constant(cls, start: int, value: Scalar) -> "Tail":
        """x_j = value for j >= start."""
        return cls(TailKind.EVENTUALLY_CONSTANT, max(int(start), 1), value)

    @classmethod
    def geometric(cls, start: int, ratio: float, coefficient: float) -> "Tail":
        """|x_j| <= coefficient * ratio**j for j >= start, with 0 <= ratio < 1."""
        if not 0.0 <= ratio < 1.0:
            raise ValueError(f"geometric tail needs 0 <= ratio < 1, got {ratio}")
        return cls(TailKind.ABS_BOUND, max(int(start), 1), 0.0, float(ratio), abs(float(coefficient)))

    @classmethod
    def monotone(cls, start: int, limit: float) -> "Tail":
        """Real x_j, monotone from start on and converging to limit."""
        return cls(TailKind.MONOTONE, max(int(start), 1), limit)

    @classmethod
    def unknown(cls) -> "Tail":
        """Nothing known; norms and sums over it stay truncated."""
        return cls()

    @property
    def known(self) -> bool:
        """True unless the kind is UNKNOWN."""
        return self.kind is not TailKind.UNKNOWN

    def eventual_value(self) -> Optional[Scalar]:
        """Return the eventual constant for zero/constant tails, else None."""
        if self.kind is TailKind.EVENTUALLY_ZERO:
            return 0.0
        if self.kind is TailKind.EVENTUALLY_CONSTANT:
            return self.value
        return None

    def bound_after(self, k: int) -> Optional[float]:
        """Bound on sup_{j>k} |x_j| when the descriptor gives one for j > k."""
        if not self.known or k + 1 < self.start:
            return None
        if self.kind is TailKind.EVENTUALLY_ZERO:
            return 0.0
        if self.kind is TailKind.EVENTUALLY_CONSTANT:
            return abs(self.value)
        if self.kind is TailKind.ABS_BOUND:
            return self.coefficient * self.ratio ** (k + 1)
        return None

    def scaled(self, c: Scalar) -> "Tail":
        """Descriptor of c * x."""
        if self.kind is TailKind.EVENTUALLY_ZERO:
            return self
        if self.kind is TailKind.EVENTUALLY_CONSTANT:
            return Tail.constant(self.start, self.value * c)
        if self.kind is TailKind.ABS_BOUND:
            return Tail.geometric(self.start, self.ratio, self.coefficient * abs(c))
        if self.kind is TailKind.MONOTONE and not isinstance(c, complex):
            return Tail.monotone(self.start, self.value * c)
        return Tail.unknown()

    def plus(self, other: "Tail") -> "Tail":
        """Descriptor of x + y, valid from the later of the two starts."""
        start = max(self.start, other.start)
        a, b = self.eventual_value(), other.eventual_value()
        if a is not None and b is not None:
            if self.kind is TailKind.EVENTUALLY_ZERO and other.kind is TailKind.EVENTUALLY_ZERO:
                return Tail.zero(start)
            return Tail.constant(start, a + b)
        if self.kind is TailKind.ABS_BOUND and other.kind is TailKind.ABS_BOUND:
            return Tail.geometric(start, max(self.ratio, other.ratio),
                                  self.coefficient + other.coefficient)
        for first, second in ((self, other), (other, self)):
            if first.kind is TailKind.EVENTUALLY_ZERO and second.kind in (TailKind.ABS_BOUND, TailKind.MONOTONE):
                return Tail(second.kind, start, second.value, second.ratio, second.coefficient)
            if (first.kind is TailKind.EVENTUALLY_CONSTANT and second.kind is TailKind.MONOTONE
                    and not isinstance(first.value, complex)):
                return Tail.monotone(start, second.value + first.value)
        return Tail.unknown()

    def times(self, other: "Tail") -> "Tail":
        """Descriptor of the coordinatewise product x * y."""
        zeros = [t.start for t in (self, other) if t.kind is TailKind.EVENTUALLY_ZERO]
        if zeros:
            return Tail.zero(min(zeros))
        start = max(self.start, other.start)
        a, b = self.eventual_value(), other.eventual_value()
        if a is not None and b is not None:
            return Tail.constant(start, a * b)
        if self.kind is TailKind.ABS_BOUND and other.kind is TailKind.ABS_BOUND:
            return Tail.geometric(start, self.ratio * other.ratio, self.coefficient * other.coefficient)
        for first, second in ((self, other), (other, self)):
            if first.kind is TailKind.EVENTUALLY_CONSTANT and second.kind is TailKind.ABS_BOUND:
                return Tail.geometric(start, second.ratio, second.coefficient * abs(first.value))
        return Tail.unknown()

    def describe(self) -> str:
        """Short label for reports."""
        if self.kind is TailKind.UNKNOWN:
            return "unknown"
        if self.kind is TailKind.ABS_BOUND:
            return f"abs-bound(from={self.start}, C={self.coefficient:g}, r={self.ratio:g})"
        return f"{self.kind.value}(from={self.start}, value={self.value})"


def _as_array(items) -> np.ndarray:
    arr = np.asarray(items)
    if arr.size == 0:
        return np.zeros(0)
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


@dataclass(frozen=True)
class Seq:
    """A lazily evaluated scalar sequence x = (x_1, x_2, ...).

    Attributes:
        rule: j -> x_j, deterministic.
        tail: what is known about x_j for large j.
        name: label used in reports.
        summer: optional closed form (lo, hi) -> sum_{j=lo}^{hi} x_j.
        block: optional vectorized (lo, hi) -> array of x_lo..x_hi.
        vector_summer: summer also accepts arrays of window bounds.
    """
    rule: Callable[[int], Scalar]
    tail: Tail = field(default_factory=Tail.unknown)
    name: str = "x"
    summer: Optional[Callable[[int, int], Scalar]] = None
    block: Optional[Callable[[int, int], np.ndarray]] = None
    vector_summer: bool = False

    def at(self, j: int) -> Scalar:
        """x_j, for j >= 1."""
        if j < 1:
            raise IndexError(f"sequence index must be >= 1, got {j}")
        return self.rule(int(j))

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Coordinates x_lo..x_hi as an array (empty if hi < lo)."""
        lo = max(int(lo), 1)
        if hi < lo:
            return np.zeros(0)
        if self.block is not None:
            return _as_array(self.block(lo, int(hi)))
        return _as_array([self.rule(j) for j in range(lo, int(hi) + 1)])

    def window_sum(self, lo: int, hi: int) -> Scalar:
        """sum_{j=lo}^{hi} x_j, compensated, closing eventual tails in closed form."""
        lo = max(int(lo), 1)
        hi = int(hi)
        if hi < lo:
            return 0.0
        if self.summer is not None:
            return self.summer(lo, hi)
        eventual = self.tail.eventual_value()
        if eventual is not None and hi >= self.tail.start:
            start = self.tail.start
            head = self.window_sum(lo, start - 1) if lo < start else 0.0
            return head + (hi - max(lo, start) + 1) * eventual
        return compensated_sum(self.values(lo, hi))

    def check_tail(self, samples: Sequence[int]) -> bool:
        """Spot-check the tail descriptor at the given indices."""
        for j in samples:
            if j < self.tail.start:
                continue
            value = self.at(j)
            eventual = self.tail.eventual_value()
            if eventual is not None and value != eventual:
                return False
            if self.tail.kind is TailKind.ABS_BOUND:
                if abs(value) > self.tail.coefficient * self.tail.ratio ** j * (1 + 1e-12):
                    return False
        return True

    def renamed(self, name: str) -> "Seq":
        """The same sequence under another label."""
        return Seq(self.rule, self.tail, name, self.summer, self.block, self.vector_summer)

    def __add__(self, other: "Seq") -> "Seq":
        """Coordinatewise sum."""
        return add(self, other)

    def __sub__(self, other: "Seq") -> "Seq":
        """Coordinatewise difference."""
        return add(self, scale(-1.0, other))

    def __neg__(self) -> "Seq":
        """-x."""
        return scale(-1.0, self)

    def __mul__(self, other):
        """Coordinatewise product with a Seq, or scaling by a scalar."""
        if isinstance(other, Seq):
            return product(self, other)
        return scale(other, self)

    def __rmul__(self, other):
        """Scaling by a scalar on the left."""
        return scale(other, self)


def add(x: Seq, y: Seq) -> Seq:
    """Coordinatewise x + y."""
    summer = None
    if x.summer is not None and y.summer is not None:
        summer = lambda lo, hi: x.summer(lo, hi) + y.summer(lo, hi)
    return Seq(lambda j: x.rule(j) + y.rule(j), x.tail.plus(y.tail), f"({x.name}+{y.name})",
               summer, lambda lo, hi: x.values(lo, hi) + y.values(lo, hi),
               x.vector_summer and y.vector_summer)


def scale(c: Scalar, x: Seq) -> Seq:
    """Coordinatewise c * x."""
    summer = None
    if x.summer is not None:
        summer = lambda lo, hi: c * x.summer(lo, hi)
    return Seq(lambda j: c * x.rule(j), x.tail.scaled(c), f"{c}*{x.name}",
               summer, lambda lo, hi: c * x.values(lo, hi), x.vector_summer)


def product(x: Seq, y: Seq) -> Seq:
    """Coordinatewise product x.y = (x_j y_j)."""
    return Seq(lambda j: x.rule(j) * y.rule(j), x.tail.times(y.tail), f"{x.name}.{y.name}",
               None, lambda lo, hi: x.values(lo, hi) * y.values(lo, hi))


def constant(c: Scalar) -> Seq:
    """c * e."""
    tail = Tail.zero(1) if c == 0 else Tail.constant(1, c)
    return Seq(lambda j: c, tail, f"const({c})",
               lambda lo, hi: (hi - lo + 1) * c,
               lambda lo, hi: np.full(hi - lo + 1, c), True)


def ones() -> Seq:
    """e = (1, 1, 1, ...)."""
    return constant(1.0).renamed("e")


def zeros() -> Seq:
    """The zero sequence."""
    return constant(0.0).renamed("0")


def unit(j: int) -> Seq:
    """delta^j: one in position j, zero elsewhere."""
    if j < 1:
        raise ValueError(f"unit index must be >= 1, got {j}")

    def summer(lo, hi):
        return 1.0 if lo <= j <= hi else 0.0

    def block(lo, hi):
        out = np.zeros(hi - lo + 1)
        if lo <= j <= hi:
            out[j - lo] = 1.0
        return out

    return Seq(lambda k: 1.0 if k == j else 0.0, Tail.zero(j + 1), f"delta^{j}", summer, block)


def section_ones(k: int) -> Seq:
    """e^(k) = delta^1 + ... + delta^k."""
    def summer(lo, hi):
        return float(max(0, min(hi, k) - lo + 1))

    def block(lo, hi):
        idx = np.arange(lo, hi + 1)
        return (idx <= k).astype(float)

    return Seq(lambda j: 1.0 if j <= k else 0.0, Tail.zero(k + 1), f"e^({k})", summer, block)


def section(x: Seq, k: int) -> Seq:
    """x^(k) = sum_{j<=k} x_j delta^j."""
    def block(lo, hi):
        out = x.values(lo, min(hi, k))
        if hi > k:
            out = np.concatenate([out, np.zeros(hi - max(lo, k + 1) + 1, dtype=out.dtype)])
        return out

    return Seq(lambda j: x.rule(j) if j <= k else 0.0, Tail.zero(k + 1), f"{x.name}^({k})",
               None, block)


def from_table(values: Sequence[Scalar], name: str = "table") -> Seq:
    """Finite table (x_1..x_L), zero afterwards."""
    table = _as_array(list(values))
    length = table.shape[0]
    prefix = PrefixSums(table)

    def rule(j):
        return table[j - 1].item() if j <= length else 0.0

    def block(lo, hi):
        out = np.zeros(hi - lo + 1, dtype=table.dtype if length else float)
        stop = min(hi, length)
        if stop >= lo:
            out[: stop - lo + 1] = table[lo - 1: stop]
        return out

    def summer(lo, hi):
        return prefix.window(lo, min(hi, length)).item()

    return Seq(rule, Tail.zero(length + 1), name, summer, block)


def alternating() -> Seq:
    """x_k = (-1)^(k+1) = 1, -1, 1, ..."""
    def partial(t):
        return (t % 2) * 1.0

    def block(lo, hi):
        idx = np.arange(lo, hi + 1)
        return np.where(idx % 2 == 1, 1.0, -1.0)

    return Seq(lambda k: 1.0 if k % 2 == 1 else -1.0, Tail.unknown(), "alternating",
               lambda lo, hi: partial(hi) - partial(lo - 1), block, True)


def harmonic_power(s: float) -> Seq:
    """x_k = 1 / k^s."""
    def block(lo, hi):
        return 1.0 / np.arange(lo, hi + 1, dtype=float) ** s

    return Seq(lambda k: 1.0 / k ** s, Tail.unknown(), f"harmonic({s:g})", None, block)


def geometric(coefficient: float, ratio: float, offset: Scalar = 0.0) -> Seq:
    """x_k = offset + coefficient * ratio^k, |ratio| < 1, with closed-form window sums."""
    if not abs(ratio) < 1.0:
        raise ValueError(f"geometric ratio must satisfy |r| < 1, got {ratio}")
    tail = Tail.geometric(1, abs(ratio), coefficient) if offset == 0 else Tail.unknown()

    def summer(lo, hi):
        count = hi - lo + 1
        geo = coefficient * ratio ** lo * (1.0 - ratio ** count) / (1.0 - ratio) if ratio != 0 else 0.0
        return offset * count + geo

    def block(lo, hi):
        idx = np.arange(lo, hi + 1, dtype=float)
        return offset + coefficient * np.power(ratio, idx)

    return Seq(lambda k: offset + coefficient * ratio ** k, tail,
               f"geometric({offset}+{coefficient:g}*{ratio:g}^k)", summer, block, True)


def periodic(pattern: Sequence[float], name: str = "periodic") -> Seq:
    """x_k = pattern[(k-1) mod P], with closed-form window sums."""
    pat = np.asarray(pattern, dtype=float)
    period = pat.shape[0]
    if period == 0:
        raise ValueError("periodic pattern must not be empty")
    cycle = math.fsum(pat.tolist())
    head = np.concatenate([[0.0], np.cumsum(pat)])

    def partial(t):
        full, rest = np.divmod(t, period)
        return full * cycle + head[rest]

    def block(lo, hi):
        return pat[(np.arange(lo, hi + 1) - 1) % period]

    return Seq(lambda k: float(pat[(k - 1) % period]), Tail.unknown(), name,
               lambda lo, hi: partial(hi) - partial(lo - 1), block, True)


def random_decay(seed: int, decay: float) -> Seq:
    """x_k = u_k * decay^k with u_k uniform in [-1, 1], reproducible per (seed, k)."""
    if not 0.0 <= decay < 1.0:
        raise ValueError(f"decay must be in [0, 1), got {decay}")

    def rule(k):
        u = np.random.default_rng([seed, k]).uniform(-1.0, 1.0)
        return float(u) * decay ** k

    return Seq(rule, Tail.geometric(1, decay, 1.0), f"random({seed},{decay:g})")


@dataclass(frozen=True)
class DefermentSchedule:
    """The pair p(n), q(n) of a deferred Cesaro mean.

    Valid when 0 <= p(n) < q(n) at every evaluated n and q is unbounded;
    ``horizon`` is the largest n the schedule is meant to be evaluated at.
    """
    lower: Callable[[int], int]
    upper: Callable[[int], int]
    name: str = "custom"
    params: tuple = ()
    horizon: int = config.DETECT_HORIZON

    def p(self, n: int) -> int:
        """Lower end p(n), unchecked."""
        return int(self.lower(n))

    def q(self, n: int) -> int:
        """Upper end q(n), unchecked."""
        return int(self.upper(n))

    def window(self, n: int) -> tuple[int, int]:
        """Return (p(n), q(n)), raising ScheduleError on a violation."""
        p, q = self.p(n), self.q(n)
        if p < 0:
            raise ScheduleError(n, f"p(n)={p} is negative")
        if p >= q:
            raise ScheduleError(n, f"p(n)={p} >= q(n)={q}")
        return p, q

    def length(self, n: int) -> int:
        """Window length q(n) - p(n)."""
        p, q = self.window(n)
        return q - p

    def bounds(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Vectors p(n), q(n) for n = lo..hi, validated."""
        ns = range(lo, hi + 1)
        p = np.fromiter((self.lower(n) for n in ns), dtype=np.int64, count=len(ns))
        q = np.fromiter((self.upper(n) for n in ns), dtype=np.int64, count=len(ns))
        bad = np.nonzero((p < 0) | (p >= q))[0]
        if bad.size:
            n = lo + int(bad[0])
            self.window(n)
        return p, q

    def is_unbounded(self, horizon: Optional[int] = None) -> bool:
        """Finite-sample proxy for q(n) -> infinity: the max of q grows over the horizon."""
        horizon = horizon or self.horizon
        if horizon < 2:
            return False
        _, q = self.bounds(1, horizon)
        half = horizon // 2
        return int(q[half:].max()) > int(q[:half].max())

    def validate(self, horizon: Optional[int] = None) -> None:
        """Raise ScheduleError unless the schedule is valid on [1, horizon]."""
        horizon = horizon or self.horizon
        self.bounds(1, horizon)
        if not self.is_unbounded(horizon):
            raise ScheduleError(horizon, "q(n) does not grow over the horizon")

    def agnew_ratio_bound(self, horizon: Optional[int] = None) -> tuple[float, bool]:
        """Max of p(n)/(q(n)-p(n)) over [1, horizon] and whether it looks bounded.

        Bounded means the second-half maximum does not exceed the first-half one.
        """
        horizon = horizon or self.horizon
        p, q = self.bounds(1, horizon)
        ratio = p / (q - p)
        half = max(horizon // 2, 1)
        early = float(ratio[:half].max())
        late = float(ratio[half:].max()) if horizon > half else early
        return float(ratio.max()), late <= early + 1e-12

    def shifted(self, by: int = 1) -> "DefermentSchedule":
        """The schedule (p(n)+by, q(n)+by)."""
        return DefermentSchedule(lambda n: self.p(n) + by, lambda n: self.q(n) + by,
                                 f"{self.name}+{by}", self.params, self.horizon)

    def with_horizon(self, horizon: int) -> "DefermentSchedule":
        """Copy with a different evaluation horizon."""
        return DefermentSchedule(self.lower, self.upper, self.name, self.params, horizon)

    def describe(self) -> str:
        """Schedule id with its parameters, e.g. poly(a=1.0,b=2.0)."""
        if not self.params:
            return self.name
        args = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}({args})"


def _ipow(n: int, a: float) -> int:
    if float(a).is_integer():
        return n ** int(a)
    return int(math.floor(n ** a))


def cesaro_schedule() -> DefermentSchedule:
    """p(n) = 0, q(n) = n: the classical Cesaro mean."""
    return DefermentSchedule(lambda n: 0, lambda n: n, "cesaro")


def block_schedule() -> DefermentSchedule:
    """p(n) = n, q(n) = 2n."""
    return DefermentSchedule(lambda n: n, lambda n: 2 * n, "block")


def poly_schedule(a: float = 1.0, b: float = 2.0) -> DefermentSchedule:
    """p(n) = floor(n^a), q(n) = floor(n^b) + 1."""
    if b < a:
        raise ValueError(f"poly schedule needs b >= a, got a={a}, b={b}")
    return DefermentSchedule(lambda n: _ipow(n, a), lambda n: _ipow(n, b) + 1, "poly",
                             (("a", a), ("b", b)))


def sliding_schedule(length: int = 1) -> DefermentSchedule:
    """p(n) = n, q(n) = n + length: windows of fixed length."""
    if length < 1:
        raise ValueError(f"sliding window length must be >= 1, got {length}")
    return DefermentSchedule(lambda n: n, lambda n: n + length, "sliding", (("length", length),))


def table_schedule(ps: Sequence[int], qs: Sequence[int]) -> DefermentSchedule:
    """Explicit p, q values for n = 1..L; beyond L both ends advance by one per step."""
    ps, qs = tuple(int(v) for v in ps), tuple(int(v) for v in qs)
    if not ps or len(ps) != len(qs):
        raise ValueError("custom table needs equally long, non-empty p and q lists")
    last = len(ps)

    def lower(n):
        return ps[n - 1] if n <= last else ps[-1] + (n - last)

    def upper(n):
        return qs[n - 1] if n <= last else qs[-1] + (n - last)

    return DefermentSchedule(lower, upper, "custom-table", (("p", ps), ("q", qs)))


def window_sums(x: Seq, lo, hi) -> np.ndarray:
    """Vector of sum_{j=lo_i}^{hi_i} x_j over many windows, sharing one prefix."""
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    if lo.size == 0:
        return np.zeros(0)
    if x.summer is not None and x.vector_summer:
        return np.where(hi >= lo, x.summer(lo, hi), 0.0)
    if x.summer is not None:
        return _as_array([x.summer(int(a), int(b)) if b >= a else 0.0 for a, b in zip(lo, hi)])
    top = int(hi.max())
    eventual = x.tail.eventual_value()
    head_end = top if eventual is None else min(top, x.tail.start - 1)
    prefix = PrefixSums(x.values(1, head_end))
    out = prefix.window(lo, np.minimum(hi, head_end))
    if eventual is not None:
        count = np.maximum(hi - np.maximum(lo, x.tail.start) + 1, 0)
        out = out + count * eventual
    return out


def partial_sums(x: Seq) -> Seq:
    """s_k = x_1 + ... + x_k."""
    tail = Tail.unknown()
    if x.tail.kind is TailKind.EVENTUALLY_ZERO:
        start = x.tail.start
        tail = Tail.constant(start, x.window_sum(1, start - 1))

    def block(lo, hi):
        ks = np.arange(lo, hi + 1)
        return window_sums(x, np.ones_like(ks), ks)

    return Seq(lambda k: x.window_sum(1, k), tail, f"S({x.name})", None, block)


def forward_sum(x: Seq) -> Seq:
    """Sx = (x_1, x_1 + x_2, ...)."""
    return partial_sums(x)


def backward_diff(x: Seq) -> Seq:
    """S^-1 x = (x_1, x_2 - x_1, ...)."""
    tail = Tail.unknown()
    if x.tail.eventual_value() is not None:
        tail = Tail.zero(x.tail.start + 1)
    elif x.tail.kind is TailKind.ABS_BOUND and x.tail.ratio > 0:
        tail = Tail.geometric(x.tail.start + 1, x.tail.ratio,
                              x.tail.coefficient * (1.0 + 1.0 / x.tail.ratio))

    def rule(j):
        return x.rule(1) if j == 1 else x.rule(j) - x.rule(j - 1)

    def summer(lo, hi):
        return x.at(hi) - (x.at(lo - 1) if lo > 1 else 0.0)

    def block(lo, hi):
        vals = x.values(max(lo - 1, 1), hi)
        if lo == 1:
            return np.concatenate([vals[:1], np.diff(vals)])
        return np.diff(vals)

    return Seq(rule, tail, f"S^-1({x.name})", summer, block)


def deferred_mean(x: Seq, d: DefermentSchedule) -> Seq:
    """(D_{p,q} x)_n = (1/(q(n)-p(n))) sum_{k=p(n)+1}^{q(n)} x_k."""
    def rule(n):
        p, q = d.window(n)
        return x.window_sum(p + 1, q) / (q - p)

    def block(lo, hi):
        p, q = d.bounds(lo, hi)
        return window_sums(x, p + 1, q) / (q - p)

    return Seq(rule, Tail.unknown(), f"D[{d.describe()}]({x.name})", None, block)


def cesaro_mean(x: Seq) -> Seq:
    """(1/n) sum_{k=1}^{n} x_k, as the deferred mean with p = 0, q(n) = n."""
    return deferred_mean(x, cesaro_schedule())


def _ramp_total(t: int, p: int, m: int) -> int:
    """sum_{j=1}^{t} clamp(j - p - 1, 0, m)."""
    if t <= p + 1:
        return 0
    if t <= p + 1 + m:
        r = t - p - 1
        return r * (r + 1) // 2
    return m * (m + 1) // 2 + (t - p - 1 - m) * m


def zeta(d: DefermentSchedule, n: int) -> Seq:
    """zeta^n = e - (1/(q-p)) sum_{k=p+1}^{q} e^(k).

    Coordinate j is clamp(j - p - 1, 0, q - p) / (q - p):
    zero through p+1, then 1/m, 2/m, ..., and 1 from q+1 on.
    """
    p, q = d.window(n)
    m = q - p

    def rule(j):
        return min(max(j - p - 1, 0), m) / m

    def block(lo, hi):
        idx = np.arange(lo, hi + 1)
        return np.clip(idx - p - 1, 0, m) / m

    def summer(lo, hi):
        return (_ramp_total(hi, p, m) - _ramp_total(lo - 1, p, m)) / m

    return Seq(rule, Tail.constant(q + 1, 1.0), f"zeta^{n}[{d.describe()}]", summer, block)


def deferred_wedge_elem(d: DefermentSchedule, n: int) -> Seq:
    """(1/(q-p)) sum_{k=p+1}^{q} delta^k: the block 1/m on positions p+1..q."""
    p, q = d.window(n)
    m = q - p

    def rule(j):
        return 1.0 / m if p < j <= q else 0.0

    def block(lo, hi):
        idx = np.arange(lo, hi + 1)
        return np.where((idx > p) & (idx <= q), 1.0 / m, 0.0)

    def summer(lo, hi):
        return max(0, min(hi, q) - max(lo, p + 1) + 1) / m

    return Seq(rule, Tail.zero(q + 1), f"wedge^{n}[{d.describe()}]", summer, block)

"""Finite-truncation limit detection.

Every "lim_n ... exists" statement is decided here, at a finite horizon, as one
of three verdicts. The detector never extrapolates: if the last window is not
tight enough and the oscillation is not clearly growing, it says Inconclusive.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np

try:
    from . import config
    from .errors import EmptyStreamError
except ImportError:
    import config
    from errors import EmptyStreamError

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]


class VerdictStatus(Enum):
    """Outcome of a limit detection."""
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    INCONCLUSIVE = "Inconclusive"


class Outcome(Enum):
    """Truth value of a criterion or suite at truncation."""
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConvergenceVerdict:
    """Result of detect_limit.

    Attributes:
        status: Converged, Diverged or Inconclusive.
        limit: mean of the final window; present iff status is Converged.
        residual: max pairwise spread over the final window.
        trace: (n, value) pairs for n = 1..horizon.
        tolerance: the tolerance the decision was made with.
        notes: free-form diagnostics.
    """
    status: VerdictStatus
    limit: Optional[Scalar]
    residual: float
    trace: tuple = ()
    tolerance: float = config.DETECT_TOL
    notes: tuple = ()

    @property
    def converged(self) -> bool:
        """True when the status is Converged."""
        return self.status is VerdictStatus.CONVERGED

    def with_notes(self, *notes: str) -> "ConvergenceVerdict":
        """Copy with extra notes appended."""
        return ConvergenceVerdict(self.status, self.limit, self.residual, self.trace,
                                  self.tolerance, self.notes + tuple(notes))


@dataclass(frozen=True)
class DetectParams:
    """Thresholds handed to detect_limit."""
    tol: float = config.DETECT_TOL
    window: int = config.DETECT_WINDOW
    horizon: int = config.DETECT_HORIZON
    divergence_bound: float = config.DIVERGENCE_BOUND
    oscillation_factor: float = config.OSCILLATION_FACTOR

    @classmethod
    def for_membership(cls, **overrides) -> "DetectParams":
        """Membership preset: tol 1e-3, window 16, horizon 10 000."""
        base = dict(tol=config.MEMBER_TOL, window=config.MEMBER_WINDOW,
                    horizon=config.MEMBER_HORIZON)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def for_criteria(cls, **overrides) -> "DetectParams":
        """Preset for T_n -> 0 decisions: tol 1e-2, window 16, horizon 200."""
        base = dict(tol=config.CRITERION_TOL, window=config.CRITERION_WINDOW,
                    horizon=config.CRITERION_HORIZON)
        base.update(overrides)
        return cls(**base)

    @property
    def oscillation_floor(self) -> float:
        return self.oscillation_factor * self.tol

    def detect(self, values) -> ConvergenceVerdict:
        return detect_limit(values, tol=self.tol, window=self.window, horizon=self.horizon,
                            divergence_bound=self.divergence_bound,
                            oscillation_floor=self.oscillation_floor)


def _spread(block: np.ndarray) -> float:
    if block.size < 2:
        return 0.0
    return float(np.abs(block[:, None] - block[None, :]).max())


def _mean(block: np.ndarray) -> Scalar:
    if np.iscomplexobj(block):
        return complex(math.fsum(block.real.tolist()), math.fsum(block.imag.tolist())) / block.size
    return math.fsum(block.tolist()) / block.size


def materialize(values, horizon: int) -> np.ndarray:
    """Evaluate an indexed stream at n = 1..horizon.

    Accepts a Seq-like object (anything with ``values(lo, hi)``), a callable
    n -> value, or an array-like (truncated to ``horizon``).
    """
    if hasattr(values, "values") and callable(getattr(values, "values")):
        return np.asarray(values.values(1, horizon))
    if callable(values):
        out = [values(n) for n in range(1, horizon + 1)]
        return np.asarray(out)
    arr = np.asarray(values)
    return arr[:horizon]


def detect_limit(values: Union[Callable[[int], Scalar], Sequence[Scalar], np.ndarray],
                 tol: float = config.DETECT_TOL,
                 window: int = config.DETECT_WINDOW,
                 horizon: int = config.DETECT_HORIZON,
                 divergence_bound: float = config.DIVERGENCE_BOUND,
                 oscillation_floor: Optional[float] = None) -> ConvergenceVerdict:
    """Decide whether values_n converges, at truncation.

    Args:
        values: the indexed stream (Seq, callable or array; n starts at 1).
        tol: spread below which the final window counts as converged.
        window: number of trailing values inspected (>= 2).
        horizon: number of values evaluated (>= window).
        divergence_bound: any |value| above this in the final window is divergence.
        oscillation_floor: spread above which a non-shrinking window is
            divergence; defaults to OSCILLATION_FACTOR * tol.

    Returns:
        ConvergenceVerdict with the full (n, value) trace.

    Raises:
        EmptyStreamError: if the stream yields no values.
        ValueError: if window < 2 or the stream is shorter than the window.
    """
    if window < 2 or horizon < window:
        raise ValueError(f"need horizon >= window >= 2, got horizon={horizon}, window={window}")
    if oscillation_floor is None:
        oscillation_floor = config.OSCILLATION_FACTOR * tol

    arr = materialize(values, horizon)
    if arr.size == 0:
        raise EmptyStreamError("empty stream")
    if arr.size < window:
        raise ValueError(f"stream has {arr.size} values, fewer than window={window}")

    trace = tuple(zip(range(1, arr.size + 1), arr.tolist()))
    last = arr[-window:]

    if not np.all(np.isfinite(last)) or float(np.abs(last).max()) > divergence_bound:
        logger.debug("diverged: bound %g exceeded at horizon %d", divergence_bound, arr.size)
        return ConvergenceVerdict(VerdictStatus.DIVERGED, None, math.inf, trace, tol,
                                  ("divergence bound exceeded",))

    spread = _spread(last)
    if spread < tol:
        limit = _mean(last)
        logger.debug("converged to %s (spread %.3g < %.3g)", limit, spread, tol)
        return ConvergenceVerdict(VerdictStatus.CONVERGED, limit, spread, trace, tol)

    half = window // 2
    early, late = _spread(last[:half]), _spread(last[half:])
    if spread > oscillation_floor and late >= early:
        logger.debug("diverged: spread %.3g above floor %.3g and not shrinking", spread, oscillation_floor)
        return ConvergenceVerdict(VerdictStatus.DIVERGED, None, spread, trace, tol,
                                  ("oscillation not shrinking",))

    return ConvergenceVerdict(VerdictStatus.INCONCLUSIVE, None, spread, trace, tol)


def limit_outcome(verdict: ConvergenceVerdict) -> Outcome:
    """Map a verdict to holds (limit exists) / fails / inconclusive."""
    if verdict.status is VerdictStatus.CONVERGED:
        return Outcome.HOLDS
    if verdict.status is VerdictStatus.DIVERGED:
        return Outcome.FAILS
    return Outcome.INCONCLUSIVE


def still_falling(verdict: ConvergenceVerdict, window: int = config.CRITERION_WINDOW,
                  ratio: float = config.DECAY_RATIO) -> bool:
    """Is |T_n| still shrinking at a rate that can carry it to 0?

    Compares mean |T| over the last ``window`` values with mean |T| over the
    window ending at half the trace. Traces settling on a nonzero value keep
    that ratio near 1; power decays n^-a with a >= 1/4 fall below ``ratio``.
    """
    values = np.abs(np.array([v for _, v in verdict.trace], dtype=complex))
    half = values.size // 2
    if window < 2 or half < window:
        return False
    late = float(values[-window:].mean())
    early = float(values[half - window:half].mean())
    return early > 0.0 and late < ratio * early


def null_outcome(verdict: ConvergenceVerdict, tol: Optional[float] = None,
                 window: int = config.CRITERION_WINDOW) -> Outcome:
    """Map a verdict on a trace T_n to holds (T_n -> 0) / fails / inconclusive.

    A trace converged above ``tol`` fails only once it has stopped falling;
    one still decaying toward 0 is inconclusive at this horizon.
    """
    tol = verdict.tolerance if tol is None else tol
    if verdict.status is VerdictStatus.CONVERGED:
        if abs(verdict.limit) < tol:
            return Outcome.HOLDS
        return Outcome.INCONCLUSIVE if still_falling(verdict, window) else Outcome.FAILS
    if verdict.status is VerdictStatus.DIVERGED:
        return Outcome.FAILS
    return Outcome.INCONCLUSIVE

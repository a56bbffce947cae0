"""Compensated summation helpers.

Window sums in deferred means can run over very long, alternating windows, so
all sums go through either ``math.fsum`` (single windows) or a Neumaier running
sum that keeps the lost low-order part next to each prefix (many windows).
"""

import math
from typing import Iterable, Union

import numpy as np

Scalar = Union[float, complex]


def compensated_sum(values: Iterable[Scalar]) -> Scalar:
    """Correctly rounded sum of real or complex values."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
    if arr.size == 0:
        return 0.0
    if np.iscomplexobj(arr):
        return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))
    return math.fsum(arr.tolist())


def _neumaier_prefix(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = values.shape[0]
    high = np.zeros(n + 1)
    low = np.zeros(n + 1)
    s = 0.0
    c = 0.0
    for idx, v in enumerate(values.tolist(), start=1):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        high[idx] = s
        low[idx] = c
    return high, low


class PrefixSums:
    """Compensated prefix sums P_k = x_1 + ... + x_k, with P_0 = 0.

    Each prefix is held as a (high, low) pair so that differences of two
    prefixes, i.e. window sums, keep the accuracy of a compensated sum.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values)
        self.is_complex = bool(np.iscomplexobj(values))
        if self.is_complex:
            self._re = _neumaier_prefix(values.real.astype(float))
            self._im = _neumaier_prefix(values.imag.astype(float))
        else:
            self._re = _neumaier_prefix(values.astype(float))
            self._im = None
        self.length = values.shape[0]

    def prefix(self, k) -> np.ndarray:
        """Return P_k for an index or array of indices 0 <= k <= length."""
        k = np.asarray(k)
        hi, lo = self._re
        out = hi[k] + lo[k]
        if self._im is not None:
            ihi, ilo = self._im
            out = out + 1j * (ihi[k] + ilo[k])
        return out

    def window(self, lo, hi) -> np.ndarray:
        """Return sum_{j=lo}^{hi} x_j (1-based, inclusive); empty windows give 0."""
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        start = np.clip(lo - 1, 0, self.length)
        stop = np.clip(hi, 0, self.length)
        stop = np.maximum(stop, start)
        h, l = self._re
        out = (h[stop] - h[start]) + (l[stop] - l[start])
        if self._im is not None:
            ih, il = self._im
            out = out + 1j * ((ih[stop] - ih[start]) + (il[stop] - il[start]))
        return out

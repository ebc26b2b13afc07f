"""Twiddle-factor ROM: W_N^m = exp(-2j*pi*m/N) for m in [0, N/2).

Only the first half circle is stored.  Inside it, the table is generated from
the first octant and completed by exact symmetries (swap / negate), so the
quarter-turn entries are exactly ``-1j`` and the octant mirrors agree to the
last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DimensionError, UsageError
from .fixedpoint import QComplex, QFormat, QValue, quantize_array

__all__ = ["TwiddleTable", "build_twiddle_table", "get_table", "twiddle", "twiddle_full", "is_power_of_two"]


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class TwiddleTable:
    n: int
    entries: np.ndarray  # complex128, length n // 2
    fmt: Optional[QFormat] = None
    re_raw: Optional[np.ndarray] = None
    im_raw: Optional[np.ndarray] = None
    overflow: bool = False

    @property
    def quantized(self) -> Optional[tuple]:
        """Quantised mirror as a tuple of :class:`QComplex` (``None`` in float mode)."""
        if self.fmt is None:
            return None
        return tuple(
            QComplex(QValue(int(r), self.fmt), QValue(int(i), self.fmt))
            for r, i in zip(self.re_raw, self.im_raw)
        )


def _half_circle(n: int) -> np.ndarray:
    half = n // 2
    out = np.empty(half, dtype=complex)
    for m in range(half):
        if 8 * m <= n:  # first octant, direct evaluation
            th = 2.0 * math.pi * m / n
            out[m] = complex(math.cos(th), -math.sin(th))
        elif 4 * m <= n:  # second octant: cos(pi/2 - a) = sin(a)
            th = 2.0 * math.pi * (n // 4 - m) / n if n >= 4 else 0.0
            out[m] = complex(math.sin(th), -math.cos(th))
        else:  # W^(N/4 + k) = -1j * W^k
            w = out[m - n // 4]
            out[m] = complex(w.imag, -w.real)
    return out


def build_twiddle_table(n: int, fmt: Optional[QFormat] = None) -> TwiddleTable:
    if not is_power_of_two(n) or n < 2:
        raise DimensionError(f"twiddle table size must be a power of two >= 2, got {n}")
    entries = _half_circle(int(n))
    entries.setflags(write=False)
    if fmt is None:
        return TwiddleTable(int(n), entries)
    re_raw, o1 = quantize_array(entries.real, fmt)
    im_raw, o2 = quantize_array(entries.imag, fmt)
    re_raw.setflags(write=False)
    im_raw.setflags(write=False)
    return TwiddleTable(int(n), entries, fmt, re_raw, im_raw, o1 or o2)


@lru_cache(maxsize=64)
def get_table(n: int, fmt: Optional[QFormat] = None) -> TwiddleTable:
    """Shared read-only table, built once per (size, format)."""
    return build_twiddle_table(n, fmt)


def twiddle(table: TwiddleTable, m: int, quantized: bool = False):
    if not 0 <= m < table.n // 2:
        raise UsageError(f"twiddle index {m} outside [0, {table.n // 2})")
    if quantized:
        if table.fmt is None:
            raise UsageError("table has no quantized mirror")
        return QComplex(QValue(int(table.re_raw[m]), table.fmt), QValue(int(table.im_raw[m]), table.fmt))
    return complex(table.entries[m])


def twiddle_full(table: TwiddleTable, m: int) -> complex:
    """W_N^m for any integer m, using W^(m + N/2) = -W^m."""
    m %= table.n
    half = table.n // 2
    if m < half:
        return complex(table.entries[m])
    return -complex(table.entries[m - half])

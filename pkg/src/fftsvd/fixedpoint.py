"""Q-format fixed-point arithmetic.

Values are stored as signed integer mantissas (``raw``) together with a
:class:`QFormat`.  ``QFormat(2, 14)`` is the 16-bit Q2.14 format: two integer
bits (sign included) and fourteen fractional bits, range ``[-2, 2 - 2**-14]``.

Every operation rounds to nearest, ties to even, and saturates on overflow.
Saturation is never silent to the caller: results carry an ``overflow`` flag.

The scalar API (``QValue``/``QComplex``) is used for reference checks and
small kernels.  :func:`round_shift`, :func:`saturate` and
:func:`quantize_array` work on plain ints or numpy integer arrays and are what
the vectorised datapaths use; both layers share the same rounding rules so
their results are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import FormatMismatchError, ParseError, UsageError

__all__ = [
    "QFormat",
    "QValue",
    "QComplex",
    "Q2_14",
    "quantize",
    "quantize_complex",
    "to_real",
    "q_add",
    "q_sub",
    "q_mul",
    "cmul",
    "round_shift",
    "saturate",
    "quantize_array",
]


@dataclass(frozen=True)
class QFormat:
    int_bits: int
    frac_bits: int

    def __post_init__(self):
        if self.int_bits < 1 or self.frac_bits < 0 or self.int_bits + self.frac_bits > 64:
            raise UsageError(f"invalid Q format Q{self.int_bits}.{self.frac_bits}")

    @classmethod
    def parse(cls, text: str) -> "QFormat":
        """Parse ``"2.14"`` (or ``"Q2.14"``) into ``QFormat(2, 14)``."""
        body = text.strip().lstrip("Qq")
        try:
            i, f = body.split(".")
            return cls(int(i), int(f))
        except ValueError as exc:
            raise ParseError(f"cannot parse Q format {text!r}") from exc

    @property
    def total_bits(self) -> int:
        return self.int_bits + self.frac_bits

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def lsb(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def min_real(self) -> float:
        return self.raw_min * self.lsb

    @property
    def max_real(self) -> float:
        return self.raw_max * self.lsb

    def one_is_representable(self) -> bool:
        return (1 << self.frac_bits) <= self.raw_max

    def __str__(self) -> str:
        return f"Q{self.int_bits}.{self.frac_bits}"


Q2_14 = QFormat(2, 14)


@dataclass(frozen=True)
class QValue:
    raw: int
    fmt: QFormat
    overflow: bool = False

    def __post_init__(self):
        if not self.fmt.raw_min <= self.raw <= self.fmt.raw_max:
            raise UsageError(f"raw mantissa {self.raw} does not fit {self.fmt}")

    def to_real(self) -> float:
        return self.raw * self.fmt.lsb

    def exact(self) -> Fraction:
        return Fraction(self.raw, 1 << self.fmt.frac_bits)

    def __float__(self) -> float:
        return self.to_real()


@dataclass(frozen=True)
class QComplex:
    re: QValue
    im: QValue

    def __post_init__(self):
        if self.re.fmt != self.im.fmt:
            raise FormatMismatchError("real and imaginary parts use different formats")

    @property
    def fmt(self) -> QFormat:
        return self.re.fmt

    @property
    def overflow(self) -> bool:
        return self.re.overflow or self.im.overflow

    def to_complex(self) -> complex:
        return complex(self.re.to_real(), self.im.to_real())

    def __complex__(self) -> complex:
        return self.to_complex()


def round_shift(v, shift: int):
    """Divide ``v`` by ``2**shift`` rounding to nearest, ties to even.

    Works on Python ints and on numpy integer (or object) arrays.
    """
    if shift <= 0:
        return v << -shift if shift else v
    q = v >> shift
    r = v - (q << shift)
    half = 1 << (shift - 1)
    if isinstance(v, np.ndarray):
        up = (r > half) | ((r == half) & ((q & 1) == 1))
        return q + up.astype(q.dtype)
    return q + (1 if r > half or (r == half and q & 1) else 0)


def saturate(v, fmt: QFormat):
    """Clamp raw mantissa(s) to ``fmt``; return ``(clamped, overflowed)``."""
    lo, hi = fmt.raw_min, fmt.raw_max
    if isinstance(v, np.ndarray):
        clamped = np.minimum(np.maximum(v, lo), hi)
        return clamped, bool(np.any(clamped != v))
    if v > hi:
        return hi, True
    if v < lo:
        return lo, True
    return v, False


def _round_real(x: float, fmt: QFormat) -> int:
    if x != x:
        raise UsageError("cannot quantize NaN")
    # anything this far out saturates anyway; keeps the scaled value finite
    limit = 2.0 ** fmt.int_bits
    x = min(max(x, -limit), limit)
    # x * 2**f is exact for binary floats; round() on float is ties-to-even.
    return int(round(x * (1 << fmt.frac_bits)))


def quantize(x: float, fmt: QFormat = Q2_14) -> QValue:
    raw, ovf = saturate(_round_real(float(x), fmt), fmt)
    return QValue(raw, fmt, ovf)


def quantize_complex(z: complex, fmt: QFormat = Q2_14) -> QComplex:
    z = complex(z)
    return QComplex(quantize(z.real, fmt), quantize(z.imag, fmt))


def quantize_array(x, fmt: QFormat = Q2_14):
    """Quantise a real array; returns ``(raw_int_array, overflowed)``."""
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise UsageError("cannot quantize NaN")
    limit = 2.0 ** fmt.int_bits
    x = np.clip(x, -limit, limit)
    dtype = np.int64 if fmt.total_bits <= 30 else object
    scaled = np.rint(x * float(1 << fmt.frac_bits))
    if dtype is object:
        raw = np.array([int(v) for v in scaled.ravel()], dtype=object).reshape(x.shape)
    else:
        raw = scaled.astype(np.int64)
    return saturate(raw, fmt)


def to_real(v):
    if isinstance(v, QComplex):
        return v.to_complex()
    return v.to_real()


def _check(a: QValue, b: QValue) -> QFormat:
    if a.fmt != b.fmt:
        raise FormatMismatchError(f"format mismatch: {a.fmt} vs {b.fmt}")
    return a.fmt


def q_add(a: QValue, b: QValue) -> QValue:
    fmt = _check(a, b)
    raw, ovf = saturate(a.raw + b.raw, fmt)
    return QValue(raw, fmt, ovf)


def q_sub(a: QValue, b: QValue) -> QValue:
    fmt = _check(a, b)
    raw, ovf = saturate(a.raw - b.raw, fmt)
    return QValue(raw, fmt, ovf)


def q_mul(a: QValue, b: QValue) -> QValue:
    fmt = _check(a, b)
    raw, ovf = saturate(round_shift(a.raw * b.raw, fmt.frac_bits), fmt)
    return QValue(raw, fmt, ovf)


def cmul(a: QComplex, b: QComplex) -> QComplex:
    """Complex product with full-precision partials and a single final rounding."""
    fmt = a.fmt
    if b.fmt != fmt:
        raise FormatMismatchError(f"format mismatch: {a.fmt} vs {b.fmt}")
    ar, ai, br, bi = a.re.raw, a.im.raw, b.re.raw, b.im.raw
    re, o1 = saturate(round_shift(ar * br - ai * bi, fmt.frac_bits), fmt)
    im, o2 = saturate(round_shift(ar * bi + ai * br, fmt.frac_bits), fmt)
    return QComplex(QValue(re, fmt, o1), QValue(im, fmt, o2))

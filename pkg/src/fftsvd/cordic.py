"""Circular CORDIC in rotation and vectoring modes.

One micro-rotation at step ``i`` with direction ``d`` is::

    x' = x - d * y * 2**-i
    y' = y + d * x * 2**-i
    z' = z - d * atan(2**-i)

Rotation mode drives ``z`` to zero (``d = sign(z)``, ``sign(0) = +1``);
vectoring mode drives ``y`` to zero (``d = -sign(y)``).  The magnitude growth
``K = prod sqrt(1 + 2**-2i)`` is removed by one multiplication with ``1/K``
after the loop.  Angles outside ``[-pi/2, pi/2]`` are folded first with exact
quarter-turn swaps.

Float mode iterates on numpy arrays (the direction sequence depends only on the
angle, so a whole row can be rotated at once).  Fixed-point mode iterates on
raw mantissas with arithmetic right shifts and saturating registers; see
:class:`FixedCordic` for the register widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import UsageError
from .fixedpoint import QFormat, QValue, quantize, quantize_array, round_shift, saturate

__all__ = [
    "AngleTable",
    "CordicState",
    "build_angle_table",
    "cordic_iterate",
    "cordic_gain",
    "cordic_rotate",
    "cordic_vector",
    "rotation_coefficients",
    "angle_format",
    "default_iters",
    "default_guard_bits",
    "rotation_directions",
    "FixedCordic",
]

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class AngleTable:
    iters: int
    angles: tuple

    def raw(self, fmt: QFormat) -> tuple:
        """Angles quantised to ``fmt`` (the angle-register format)."""
        return _raw_angles(self.iters, fmt)


@lru_cache(maxsize=None)
def build_angle_table(iters: int) -> AngleTable:
    if not 1 <= iters <= 64:
        raise UsageError(f"iteration count must be in [1, 64], got {iters}")
    return AngleTable(iters, tuple(math.atan(2.0 ** -i) for i in range(iters)))


@lru_cache(maxsize=None)
def _raw_angles(iters: int, fmt: QFormat) -> tuple:
    return tuple(quantize(a, fmt).raw for a in build_angle_table(iters).angles)


@lru_cache(maxsize=None)
def cordic_gain(iters: int) -> float:
    if iters < 1:
        raise UsageError("iteration count must be >= 1")
    k = 1.0
    for i in range(iters):
        k *= math.sqrt(1.0 + 2.0 ** (-2 * i))
    return k


def default_iters(fmt: Optional[QFormat]) -> int:
    return 32 if fmt is None else min(64, fmt.frac_bits + 2)


def default_guard_bits(iters: int) -> int:
    return max(2, (iters - 1).bit_length() + 1)


def angle_format(fmt: QFormat, guard_bits: int = 0) -> QFormat:
    return QFormat(3, fmt.frac_bits + guard_bits)


@dataclass(frozen=True)
class CordicState:
    x: Union[float, QValue]
    y: Union[float, QValue]
    z: Union[float, QValue]
    i: int = 0


def cordic_iterate(s: CordicState, d: int, table: AngleTable) -> CordicState:
    """One micro-rotation.  Works on floats or on ``QValue`` registers."""
    if not 0 <= s.i < table.iters:
        raise UsageError(f"iteration {s.i} is past the end of a {table.iters}-entry table")
    if d not in (1, -1):
        raise UsageError("direction must be +1 or -1")
    i = s.i
    if isinstance(s.x, QValue):
        fmt, zfmt = s.x.fmt, s.z.fmt
        xr, yr = s.x.raw, s.y.raw
        nx, o1 = saturate(xr - d * (yr >> i), fmt)
        ny, o2 = saturate(yr + d * (xr >> i), fmt)
        nz, o3 = saturate(s.z.raw - d * table.raw(zfmt)[i], zfmt)
        return CordicState(QValue(nx, fmt, o1), QValue(ny, fmt, o2), QValue(nz, zfmt, o3), i + 1)
    scale = 2.0 ** -i
    return CordicState(
        s.x - d * s.y * scale,
        s.y + d * s.x * scale,
        s.z - d * table.angles[i],
        i + 1,
    )


def _fold_rotation(x, y, angle: float):
    angle = math.remainder(angle, 2.0 * math.pi)
    if angle > HALF_PI:
        return -y, x, angle - HALF_PI
    if angle < -HALF_PI:
        return y, -x, angle + HALF_PI
    return x, y, angle


def _fold_vector(x: float, y: float):
    """Rotate into the right half-plane; returns (x, y, angle already removed)."""
    if x >= 0:
        return x, y, 0.0
    if y >= 0:
        return y, -x, HALF_PI
    return -y, x, -HALF_PI


def cordic_rotate(x, y, angle: float, iters: int = 32, fmt: Optional[QFormat] = None):
    """Rotate ``(x, y)`` counter-clockwise by ``angle`` radians.

    ``x`` and ``y`` may be scalars or equal-shape arrays.  Returns gain
    compensated ``(x', y')`` as floats (arrays for array input).
    """
    table = build_angle_table(iters)
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    if fmt is not None:
        eng = FixedCordic(fmt, iters)
        xr, _ = quantize_array(x, fmt)
        yr, _ = quantize_array(y, fmt)
        ox, oy = eng.rotate(xr, yr, angle)
        ox, oy = ox * fmt.lsb, oy * fmt.lsb
        return (float(ox), float(oy)) if scalar else (ox, oy)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y, z = _fold_rotation(x, y, float(angle))
    for i, a in enumerate(table.angles):
        d = 1.0 if z >= 0 else -1.0
        sc = d * 2.0 ** -i
        x, y = x - sc * y, y + sc * x
        z -= d * a
    inv_k = 1.0 / cordic_gain(iters)
    x, y = x * inv_k, y * inv_k
    return (float(x), float(y)) if scalar else (x, y)


def cordic_vector(x: float, y: float, iters: int = 32, fmt: Optional[QFormat] = None):
    """Return ``(magnitude, angle)`` of ``(x, y)``; angle in ``(-pi, pi]``."""
    if x == 0 and y == 0:
        raise UsageError("cannot vector the zero vector")
    if fmt is not None:
        eng = FixedCordic(fmt, iters)
        (xr, yr), _ = quantize_array([x, y], fmt)
        if xr == 0 and yr == 0:
            raise UsageError("vector quantises to zero")
        mag, ang = eng.vector(int(xr), int(yr))
        return mag * fmt.lsb, ang * eng.afmt.lsb
    table = build_angle_table(iters)
    x, y, z = _fold_vector(float(x), float(y))
    for i, a in enumerate(table.angles):
        d = -1.0 if y >= 0 else 1.0
        sc = d * 2.0 ** -i
        x, y = x - sc * y, y + sc * x
        z -= d * a
    return x / cordic_gain(iters), z


def rotation_directions(angle: float, iters: int = 32) -> list:
    """Direction sequence of float rotation mode for an already-folded angle."""
    z = float(angle)
    out = []
    for a in build_angle_table(iters).angles:
        d = 1 if z >= 0 else -1
        out.append(d)
        z -= d * a
    return out


def rotation_coefficients(angle: float, iters: int = 32):
    """``(cos, sin)`` of the angle CORDIC actually realises.

    Rotating the unit vector once gives the 2x2 map that the same micro-rotation
    sequence applies to any vector, so callers can rotate many pairs with two
    multiplies each.  Float mode only.
    """
    return cordic_rotate(1.0, 0.0, angle, iters)


class FixedCordic:
    """Bit-accurate CORDIC datapath on raw mantissas.

    Data enter and leave in ``fmt``.  Internally the x/y registers carry
    ``guard_bits`` extra fractional bits (truncating arithmetic shifts would
    otherwise bias every micro-rotation) and the angle register uses
    ``angle_format(fmt, guard_bits)``.
    """

    def __init__(self, fmt: QFormat, iters: Optional[int] = None, guard_bits: Optional[int] = None):
        self.fmt = fmt
        self.iters = default_iters(fmt) if iters is None else iters
        self.guard = default_guard_bits(self.iters) if guard_bits is None else guard_bits
        self.wfmt = QFormat(fmt.int_bits, fmt.frac_bits + self.guard)
        self.afmt = angle_format(fmt, self.guard)
        self.angles = build_angle_table(self.iters).raw(self.afmt)
        self.inv_gain = quantize(1.0 / cordic_gain(self.iters), self.wfmt).raw
        self.half_pi = quantize(HALF_PI, self.afmt).raw
        self.overflow = False

    def _sat(self, v, fmt=None):
        v, o = saturate(v, fmt or self.fmt)
        self.overflow |= o
        return v

    def _wsat(self, v):
        return self._sat(v, self.wfmt)

    def _leave(self, v):
        # drop guard bits and apply 1/K in one rounding
        return self._sat(round_shift(v * self.inv_gain, self.wfmt.frac_bits + self.guard))

    def quantize_angle(self, angle: float) -> int:
        return self._sat(quantize(angle, self.afmt).raw, self.afmt)

    def rotate(self, xr, yr, angle: float):
        """Rotate raw registers by a real angle (folded, then quantised)."""
        return self.rotate_folded(xr, yr, self.quantize_angle(math.remainder(float(angle), 2.0 * math.pi)))

    def rotate_folded(self, xr, yr, z: int):
        """Rotate by a raw angle anywhere in the angle format's range."""
        while z > self.half_pi:
            xr, yr, z = self._sat(-yr), xr, z - self.half_pi
        while z < -self.half_pi:
            xr, yr, z = yr, self._sat(-xr), z + self.half_pi
        return self.rotate_raw(xr, yr, z)

    def directions(self, z: int) -> list:
        """Direction sequence rotation mode takes for a raw angle in range."""
        out = []
        for a in self.angles:
            d = 1 if z >= 0 else -1
            out.append(d)
            z -= d * a
        return out

    def rotate_raw(self, xr, yr, z: int):
        g = self.guard
        xr, yr = xr << g, yr << g
        for i, a in enumerate(self.angles):
            if z >= 0:
                xr, yr = self._wsat(xr - (yr >> i)), self._wsat(yr + (xr >> i))
                z -= a
            else:
                xr, yr = self._wsat(xr + (yr >> i)), self._wsat(yr - (xr >> i))
                z += a
        return self._leave(xr), self._leave(yr)

    def vector(self, xr: int, yr: int):
        """Raw ``(magnitude, angle)``; angle is in the angle format."""
        g = self.guard
        xr, yr = xr << g, yr << g
        if xr >= 0:
            z = 0
        elif yr >= 0:
            xr, yr, z = yr, self._wsat(-xr), self.half_pi
        else:
            xr, yr, z = self._wsat(-yr), xr, -self.half_pi
        for i, a in enumerate(self.angles):
            if yr >= 0:
                xr, yr = self._wsat(xr + (yr >> i)), self._wsat(yr - (xr >> i))
                z += a
            else:
                xr, yr = self._wsat(xr - (yr >> i)), self._wsat(yr + (xr >> i))
                z -= a
        return self._leave(xr), self._sat(z, self.afmt)

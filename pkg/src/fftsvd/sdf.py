"""Radix-2 single-path delay-feedback (SDF) FFT.

The streaming model is a cascade of ``log2(N)`` stages.  Stage ``s`` owns a
delay line of depth ``N / 2**(s+1)`` and works in periods of twice that many
cycles: during the first half it stores its input and forwards the delay-line
head (the lower butterfly outputs of the previous period); during the second
half it pops the stored sample, runs the DIF butterfly against the incoming
one, emits the sum and feeds the twiddled difference back into the delay line.
Output leaves the last stage in bit-reversed order.

Fixed-point mode works on raw Q-format mantissas.  Every butterfly output is
scaled by 1/2 (one rounding per output), so the whole transform carries a
documented factor 1/N and stays inside the input's range.  ``scaling="input"``
applies the 1/N as one input pre-scale instead.

:func:`fft_block` evaluates the same DIF network one stage at a time on numpy
arrays.  It is bit-identical to :class:`SdfPipeline` in fixed-point mode and
is the fast path used by the 2-D transform and the benchmarks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, UsageError
from .fixedpoint import QFormat, quantize_array, round_shift, saturate
from .twiddle import TwiddleTable, get_table, is_power_of_two

__all__ = [
    "butterfly",
    "dif_butterfly",
    "bit_reverse_indices",
    "bit_reverse_permute",
    "latency",
    "DelayBuffer",
    "SdfStage",
    "SdfPipeline",
    "stage_step",
    "fft_stream",
    "simulate_first_output",
    "fft_block",
    "fixed_fft",
    "FixedFftResult",
    "SCALINGS",
]

SCALINGS = ("stage", "input")


def butterfly(a, b, w):
    """Decimation-in-time butterfly: ``(a + w*b, a - w*b)``."""
    t = w * b
    return a + t, a - t


def dif_butterfly(a, b, w):
    """Decimation-in-frequency butterfly: ``(a + b, (a - b)*w)``."""
    return a + b, (a - b) * w


def _log2(n: int) -> int:
    return int(n).bit_length() - 1


def _require_pow2(n: int, what: str = "length"):
    if not is_power_of_two(n):
        raise DimensionError(f"{what} must be a power of two, got {n}")


def bit_reverse_indices(n: int) -> np.ndarray:
    _require_pow2(n)
    bits = _log2(n)
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def bit_reverse_permute(v: Sequence):
    """Move element ``k`` to index ``bitrev(k)``; an involution."""
    arr = np.asarray(v)
    n = arr.shape[-1]
    _require_pow2(n)
    return arr[..., bit_reverse_indices(n)]


def latency(n: int, pipeline_regs: int = 1) -> int:
    """Cycles from the first input sample to the first output sample."""
    _require_pow2(n)
    return (n - 1) + pipeline_regs * _log2(n)


# ---------------------------------------------------------------------------
# datapath arithmetic shared by the streaming and batch models


class _FloatPath:
    """Plain double-precision complex arithmetic, no scaling."""

    zero = 0j

    def __init__(self, n: int, table: TwiddleTable):
        self.n = n
        self.table = table
        self.overflow = False
        self._w = [complex(w) for w in table.entries]

    def load(self, x: complex):
        return complex(x)

    def unload(self, v) -> complex:
        return v

    def upper(self, a, b):
        return a + b

    def lower(self, a, b, m: int):
        d = a - b
        if m == 0:
            return d
        if 4 * m == self.n:
            return complex(d.imag, -d.real)
        return d * self._w[m]


class _FixedPath:
    """Raw-mantissa complex arithmetic with per-butterfly scaling."""

    zero = (0, 0)

    def __init__(self, n: int, table: TwiddleTable, fmt: QFormat, scaling: str):
        self.n = n
        self.table = table
        self.fmt = fmt
        self.shift = 1 if scaling == "stage" else 0
        self.in_scale = 1.0 if scaling == "stage" else 1.0 / n
        self.overflow = False
        self._wr = [int(v) for v in table.re_raw]
        self._wi = [int(v) for v in table.im_raw]

    def _sat(self, v):
        v, o = saturate(v, self.fmt)
        if o:
            self.overflow = True
        return v

    def load(self, x: complex):
        x = complex(x) * self.in_scale
        (re, im), o = quantize_array([x.real, x.imag], self.fmt)
        self.overflow |= o
        return (int(re), int(im))

    def unload(self, v) -> complex:
        return complex(v[0] * self.fmt.lsb, v[1] * self.fmt.lsb)

    def upper(self, a, b):
        s = self.shift
        return (self._sat(round_shift(a[0] + b[0], s)), self._sat(round_shift(a[1] + b[1], s)))

    def lower(self, a, b, m: int):
        s = self.shift
        dr, di = a[0] - b[0], a[1] - b[1]
        if m == 0:
            return (self._sat(round_shift(dr, s)), self._sat(round_shift(di, s)))
        if 4 * m == self.n:
            return (self._sat(round_shift(di, s)), self._sat(round_shift(-dr, s)))
        wr, wi = self._wr[m], self._wi[m]
        f = self.fmt.frac_bits + s
        return (
            self._sat(round_shift(dr * wr - di * wi, f)),
            self._sat(round_shift(dr * wi + di * wr, f)),
        )


def _make_path(n: int, fmt: Optional[QFormat], scaling: str, table: Optional[TwiddleTable]):
    if scaling not in SCALINGS:
        raise UsageError(f"scaling must be one of {SCALINGS}")
    if table is None:
        table = get_table(n, fmt)
    elif table.n != n:
        raise UsageError("twiddle table size does not match transform size")
    if fmt is None:
        return _FloatPath(n, table)
    if table.fmt != fmt:
        raise UsageError("twiddle table format does not match datapath format")
    return _FixedPath(n, table, fmt, scaling)


# ---------------------------------------------------------------------------
# streaming model


class DelayBuffer:
    """Fixed-depth FIFO: a value pushed now is popped ``depth`` pushes later."""

    def __init__(self, depth: int):
        if depth < 1:
            raise UsageError("delay buffer depth must be >= 1")
        self.depth = depth
        self.slots: deque = deque()

    @property
    def occupancy(self) -> int:
        return len(self.slots)

    def full(self) -> bool:
        return len(self.slots) == self.depth

    def push(self, item):
        if self.full():
            raise UsageError("delay buffer overflow")
        self.slots.append(item)

    def pop(self):
        return self.slots.popleft()

    def clear(self):
        self.slots.clear()


@dataclass
class SdfStage:
    index: int
    n: int
    path: object
    pipeline_regs: int = 1
    buffer: DelayBuffer = field(init=False)
    phase: int = field(init=False, default=0)
    started: bool = field(init=False, default=False)
    last_valid: bool = field(init=False, default=False)
    regs: deque = field(init=False)

    def __post_init__(self):
        self.buffer = DelayBuffer(self.depth)
        self.regs = deque()

    @property
    def depth(self) -> int:
        return self.n >> (self.index + 1)

    @property
    def is_final(self) -> bool:
        # the SdfUnit2 position: depth-1 buffer, twiddle always 1
        return self.depth == 1

    @property
    def twiddle_indices(self) -> list:
        return [j << self.index for j in range(self.depth)]

    @property
    def mode(self) -> str:
        return "accumulate" if self.phase < self.depth else "emit"

    def reset(self):
        self.buffer.clear()
        self.regs.clear()
        self.phase = 0
        self.started = False
        self.last_valid = False


def stage_step(stage: SdfStage, sample_in, valid: bool = True):
    """Advance one stage by one clock.

    ``sample_in`` is a datapath value (complex in float mode, raw pair in
    fixed mode).  Returns the stage's output for this cycle, or ``None`` while
    no valid output is available.
    """
    path = stage.path
    depth = stage.depth
    if not stage.started:
        if not valid:
            return None
        stage.started = True
        stage.phase = 0
    elif valid != stage.last_valid and stage.phase != 0:
        raise UsageError(
            f"stage {stage.index}: stream {'resumed' if valid else 'stopped'} mid-frame "
            f"(phase {stage.phase} of {2 * depth}); reset or align to a frame boundary"
        )
    stage.last_valid = valid
    item = (sample_in if valid else path.zero, valid)

    head = stage.buffer.pop() if stage.buffer.full() else (path.zero, False)
    if stage.phase < depth:
        stage.buffer.push(item)
        out = head
    else:
        (a, va), (b, vb) = head, item
        m = (stage.phase - depth) << stage.index
        stage.buffer.push((path.lower(a, b, m), va and vb))
        out = (path.upper(a, b), va and vb)
    stage.phase = (stage.phase + 1) % (2 * depth)

    if stage.pipeline_regs:
        stage.regs.append(out)
        if len(stage.regs) <= stage.pipeline_regs:
            return None
        out = stage.regs.popleft()
    return out[0] if out[1] else None


class SdfPipeline:
    """Cascade of SDF stages processing one complex sample per cycle."""

    def __init__(
        self,
        n: int,
        fmt: Optional[QFormat] = None,
        *,
        ordering: str = "bitrev",
        pipeline_regs: int = 1,
        scaling: str = "stage",
        table: Optional[TwiddleTable] = None,
    ):
        _require_pow2(n, "transform size")
        if n < 2:
            raise DimensionError("transform size must be >= 2")
        if ordering not in ("bitrev", "natural"):
            raise UsageError("ordering must be 'bitrev' or 'natural'")
        if pipeline_regs < 0:
            raise UsageError("pipeline_regs must be >= 0")
        self.n = n
        self.fmt = fmt
        self.ordering = ordering
        self.pipeline_regs = pipeline_regs
        self.scaling = scaling
        self.path = _make_path(n, fmt, scaling, table)
        self.stages = [SdfStage(s, n, self.path, pipeline_regs) for s in range(_log2(n))]
        self.reset()

    def reset(self):
        for st in self.stages:
            st.reset()
        self.cycle = 0
        self.first_output_cycle: Optional[int] = None
        self.path.overflow = False

    @property
    def overflow(self) -> bool:
        return self.path.overflow

    @property
    def scale(self) -> float:
        """Factor applied to the spectrum by the datapath (1 in float mode)."""
        return 1.0 if self.fmt is None else 1.0 / self.n

    @property
    def latency(self) -> int:
        return latency(self.n, self.pipeline_regs)

    def clock(self, sample=None):
        """One clock: feed a datapath value (or a bubble) and return the output."""
        valid = sample is not None
        v = sample
        for st in self.stages:
            v = stage_step(st, v, valid)
            valid = v is not None
        if valid and self.first_output_cycle is None:
            self.first_output_cycle = self.cycle
        self.cycle += 1
        return v


def fft_stream(pipeline: SdfPipeline, samples: Sequence[complex]) -> list:
    """Stream whole frames through the pipeline and collect the spectra.

    Output is bit-reversed per frame unless the pipeline was built with
    ``ordering="natural"``.  In fixed-point mode the values are the datapath's
    representation, i.e. the spectrum times ``pipeline.scale``.
    """
    n = pipeline.n
    samples = list(samples)
    if len(samples) % n:
        raise UsageError(f"stream length {len(samples)} is not a multiple of frame size {n}")
    path = pipeline.path
    out = []
    for x in samples:
        y = pipeline.clock(path.load(x))
        if y is not None:
            out.append(path.unload(y))
    while len(out) < len(samples):
        y = pipeline.clock(None)
        if y is not None:
            out.append(path.unload(y))
    # keep the input side frame aligned so the pipeline can be reused
    while pipeline.cycle % n:
        pipeline.clock(None)
    if pipeline.ordering == "natural":
        frames = np.asarray(out, dtype=complex).reshape(-1, n)
        out = list(bit_reverse_permute(frames).ravel())
    return out


def simulate_first_output(n: int, pipeline_regs: int = 1) -> int:
    """Cycle at which frame 0's first output appears, counted by clocking the model."""
    pipe = SdfPipeline(n, pipeline_regs=pipeline_regs)
    fft_stream(pipe, np.zeros(n, dtype=complex))
    return pipe.first_output_cycle


# ---------------------------------------------------------------------------
# batch model


@dataclass
class FixedFftResult:
    """Raw output of the fixed-point transform in natural order."""

    re_raw: np.ndarray
    im_raw: np.ndarray
    fmt: QFormat
    scale: float
    overflow: bool

    def values(self) -> np.ndarray:
        """Datapath values (spectrum times ``scale``)."""
        return (self.re_raw.astype(float) + 1j * self.im_raw.astype(float)) * self.fmt.lsb

    def spectrum(self) -> np.ndarray:
        return self.values() / self.scale


def _dif_float(x: np.ndarray, table: TwiddleTable) -> np.ndarray:
    """Natural-order input, bit-reversed output; transforms the last axis."""
    n = x.shape[-1]
    lead = x.shape[:-1]
    v = np.array(x, dtype=complex)
    for s in range(_log2(n)):
        d = n >> (s + 1)
        v = v.reshape(lead + (-1, 2, d))
        a, b = v[..., 0, :], v[..., 1, :]
        up = a + b
        diff = a - b
        m = np.arange(d) << s
        w = np.asarray(table.entries)[m]
        lo = diff * w
        # m == 0 (times 1) and m == N/4 (times -1j) bypass the multiplier
        lo[..., 0] = diff[..., 0]
        q = n >> (s + 2)
        if q:
            lo[..., q] = diff[..., q].imag - 1j * diff[..., q].real
        v = np.stack([up, lo], axis=-2).reshape(lead + (n,))
    return v


def _dif_fixed(re: np.ndarray, im: np.ndarray, table: TwiddleTable, fmt: QFormat, shift: int):
    n = re.shape[-1]
    lead = re.shape[:-1]
    overflow = False
    f = fmt.frac_bits + shift

    def sat(v):
        nonlocal overflow
        v, o = saturate(v, fmt)
        overflow |= o
        return v

    wr_all = np.asarray(table.re_raw)
    wi_all = np.asarray(table.im_raw)
    for s in range(_log2(n)):
        d = n >> (s + 1)
        re = re.reshape(lead + (-1, 2, d))
        im = im.reshape(lead + (-1, 2, d))
        ar, br = re[..., 0, :], re[..., 1, :]
        ai, bi = im[..., 0, :], im[..., 1, :]
        ur = sat(round_shift(ar + br, shift))
        ui = sat(round_shift(ai + bi, shift))
        dr = ar - br
        di = ai - bi
        m = np.arange(d) << s
        wr = wr_all[m]
        wi = wi_all[m]
        lr = round_shift(dr * wr - di * wi, f)
        li = round_shift(dr * wi + di * wr, f)
        lr[..., 0] = round_shift(dr[..., 0], shift)
        li[..., 0] = round_shift(di[..., 0], shift)
        q = n >> (s + 2)
        if q:
            lr[..., q] = round_shift(di[..., q], shift)
            li[..., q] = round_shift(-dr[..., q], shift)
        lr = sat(lr)
        li = sat(li)
        re = np.stack([ur, lr], axis=-2).reshape(lead + (n,))
        im = np.stack([ui, li], axis=-2).reshape(lead + (n,))
    return re, im, overflow


def fixed_fft(
    x: Sequence[complex],
    fmt: QFormat,
    *,
    scaling: str = "stage",
    table: Optional[TwiddleTable] = None,
) -> FixedFftResult:
    """Bit-accurate fixed-point DIF transform of the last axis, natural order."""
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    _require_pow2(n)
    if scaling not in SCALINGS:
        raise UsageError(f"scaling must be one of {SCALINGS}")
    if table is None:
        table = get_table(n, fmt) if n >= 2 else None
    in_scale = 1.0 if scaling == "stage" else 1.0 / n
    re, o1 = quantize_array(x.real * in_scale, fmt)
    im, o2 = quantize_array(x.imag * in_scale, fmt)
    overflow = o1 or o2
    if n >= 2:
        re, im, o3 = _dif_fixed(re, im, table, fmt, 1 if scaling == "stage" else 0)
        overflow |= o3
        idx = bit_reverse_indices(n)
        re, im = re[..., idx], im[..., idx]
    return FixedFftResult(re, im, fmt, 1.0 / n, overflow)


def fft_block(
    x: Sequence[complex],
    fmt: Optional[QFormat] = None,
    *,
    scaling: str = "stage",
    table: Optional[TwiddleTable] = None,
) -> np.ndarray:
    """Natural-order spectrum of ``x`` (last axis).

    Float mode is the exact DIF network in double precision.  With ``fmt``
    the bit-accurate fixed-point datapath runs and the result is divided by
    the applied 1/N factor; use :func:`fixed_fft` to get at the raw words,
    the scale and the overflow flag.
    """
    if fmt is not None:
        return fixed_fft(x, fmt, scaling=scaling, table=table).spectrum()
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    _require_pow2(n)
    if n == 1:
        return x.copy()
    if table is None:
        table = get_table(n)
    elif table.n != n:
        raise UsageError("twiddle table size does not match transform size")
    return bit_reverse_permute(_dif_float(x, table))

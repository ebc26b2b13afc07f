"""Non-blind watermarking in the singular values of a spectral magnitude block.

Embedding::

    F = fft2d(host)
    M = |F[r0:r0+B, c0:c0+B]|,  M = U diag(s) V^T
    s'[pos[j]] = s[pos[j]] * (1 + alpha * (+1 if bit j else -1))
    F'[block] = (U diag(s') V^T) * exp(1j * angle(F[block]))
    F'[mirror] = conj(F'[block]);  marked = clamp(real(ifft2d(F')), 0, 1)

``pos`` is a keyed permutation of ``1 .. B-1`` (index 0, the largest singular
value, is never touched), drawn by Fisher-Yates with a SplitMix64 stream::

    state += 0x9E3779B97F4A7C15                  (mod 2**64)
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)
    idx = [1, ..., B-1]; for i = B-2 down to 1: j = next() % (i+1); swap idx[i], idx[j]
    pos = idx[:nbits]

Extraction demodulates the marked block with the original phase and projects
it on the original singular vectors, ``s'_i = u_i^T Re(F'_blk e^{-j phase}) v_i``,
so each bit reads ``sign(s'_i / s_i - 1)``.  Sorting a fresh SVD of the marked
block would swap neighbours whose values cross after modulation.

The block must sit strictly inside the upper half of the row spectrum
(``1 <= r0`` and ``r0 + B <= H/2``) so that it and its conjugate mirror are
disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, UsageError
from .pgm import Image
from .sdf import fft_block
from .svd import svd
from .twiddle import is_power_of_two

__all__ = [
    "WatermarkKey",
    "HostAnalysis",
    "SplitMix64",
    "keyed_positions",
    "fft2d",
    "ifft2d",
    "embed",
    "embed_quantized",
    "extract",
    "analyse_host",
    "read_ratios",
    "similarity",
    "psnr",
    "bits_from_string",
    "bits_to_string",
    "synthetic_host",
]

_MASK = (1 << 64) - 1
ERASURE_TOL = 1e-9


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


def keyed_positions(seed: int, block_size: int, count: int) -> list:
    """First ``count`` entries of the keyed permutation of ``1 .. block_size-1``."""
    if count > block_size - 1:
        raise CapacityError(f"{count} bits do not fit in {block_size - 1} positions")
    idx = list(range(1, block_size))
    rng = SplitMix64(seed)
    for i in range(len(idx) - 1, 0, -1):
        j = rng.next() % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:count]


@dataclass(frozen=True)
class WatermarkKey:
    seed: int
    block_origin: tuple = (1, 1)
    block_size: int = 32
    alpha: float = 0.05

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _MASK:
            raise UsageError("seed must be a 64-bit unsigned integer")
        if not is_power_of_two(self.block_size) or self.block_size < 2:
            raise UsageError(f"block size must be a power of two >= 2, got {self.block_size}")
        if not self.alpha >= 0.0:
            raise UsageError("alpha must be non-negative")

    @property
    def capacity(self) -> int:
        return self.block_size - 1

    def check_fits(self, shape) -> None:
        h, w = shape
        r0, c0 = self.block_origin
        b = self.block_size
        if r0 < 1 or r0 + b > h // 2 or c0 < 0 or c0 + b > w:
            raise DimensionError(
                f"block {b} at {self.block_origin} does not fit the non-DC half-spectrum of a {h}x{w} image"
            )

    def slices(self):
        r0, c0 = self.block_origin
        return slice(r0, r0 + self.block_size), slice(c0, c0 + self.block_size)


def _check_pow2(shape) -> None:
    h, w = shape
    if not (is_power_of_two(h) and is_power_of_two(w)):
        raise DimensionError(f"image dimensions must be powers of two, got {h}x{w}")


def fft2d(img) -> np.ndarray:
    """Row-column 2-D transform: every row, then every column."""
    p = img.pixels if isinstance(img, Image) else np.asarray(img)
    if p.ndim != 2:
        raise DimensionError("fft2d needs a 2-D array")
    _check_pow2(p.shape)
    rows = fft_block(p)
    return fft_block(rows.T).T


def ifft2d(spec) -> np.ndarray:
    spec = np.asarray(spec, dtype=complex)
    return np.conj(fft2d(np.conj(spec))) / spec.size


def _mirror(shape, rs: slice, cs: slice):
    h, w = shape
    rows = (-np.arange(rs.start, rs.stop)) % h
    cols = (-np.arange(cs.start, cs.stop)) % w
    return np.ix_(rows, cols)


def _as_bits(bits: Sequence) -> np.ndarray:
    b = np.asarray(list(bits), dtype=np.int64)
    if b.ndim != 1 or b.size == 0:
        raise UsageError("watermark needs at least one bit")
    if not np.all((b == 0) | (b == 1)):
        raise UsageError("watermark bits must be 0 or 1")
    return b


@dataclass
class HostAnalysis:
    """The original block's phase and singular triplets, reused across reads."""

    key: WatermarkKey
    shape: tuple
    phase: np.ndarray
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    spectrum: np.ndarray


def analyse_host(host: Image, key: WatermarkKey) -> HostAnalysis:
    _check_pow2(host.shape)
    key.check_fits(host.shape)
    spec = fft2d(host)
    blk = spec[key.slices()]
    f = svd(np.abs(blk))
    return HostAnalysis(key, host.shape, np.angle(blk), f.u, f.sigma, f.v, spec)


def _modulated(host: Image, b: np.ndarray, key: WatermarkKey, ha: HostAnalysis, gain: np.ndarray) -> Image:
    pos = keyed_positions(key.seed, key.block_size, b.size)
    sig = ha.sigma.copy()
    sig[pos] *= 1.0 + gain * key.alpha * (2 * b - 1)
    mag = (ha.u * sig) @ ha.v.T
    spec = ha.spectrum.copy()
    rs, cs = key.slices()
    spec[rs, cs] = mag * np.exp(1j * ha.phase)
    spec[_mirror(host.shape, rs, cs)] = np.conj(spec[rs, cs])
    out = ifft2d(spec)
    scale = max(1.0, float(np.max(np.abs(out.real))))
    residue = float(np.max(np.abs(out.imag)))
    if residue > 1e-9 * scale:
        raise RuntimeError(f"conjugate symmetry broken: imaginary residue {residue:.3e}")
    return Image(np.clip(out.real, 0.0, 1.0))


def _prepare(host: Image, bits: Sequence, key: WatermarkKey, analysis: Optional[HostAnalysis]):
    b = _as_bits(bits)
    if b.size > key.capacity:
        raise CapacityError(f"{b.size} bits exceed the block capacity of {key.capacity}")
    return b, analysis or analyse_host(host, key)


def embed(host: Image, bits: Sequence, key: WatermarkKey, analysis: Optional[HostAnalysis] = None) -> Image:
    """Marked copy of ``host`` (pixels clamped to [0, 1])."""
    b, ha = _prepare(host, bits, key, analysis)
    return _modulated(host, b, key, ha, np.ones(b.size))


@dataclass
class QuantizedEmbedding:
    image: Image
    gain: np.ndarray
    failed: int
    rounds: int


def embed_quantized(
    host: Image,
    bits: Sequence,
    key: WatermarkKey,
    analysis: Optional[HostAnalysis] = None,
    maxval: int = 255,
    max_rounds: int = 24,
) -> QuantizedEmbedding:
    """Embed for storage at ``maxval`` levels, so the stored image still decodes.

    At small alpha the pixel change is below half a level, and rounding to
    integer levels erases the modulation of small singular values.  Each round
    quantizes the marked image, reads it back, and doubles the strength of
    every position that did not decode to its bit.  ``failed`` counts the bits
    still wrong after ``max_rounds``.  The result image is on the level grid.
    """
    b, ha = _prepare(host, bits, key, analysis)
    gain = np.ones(b.size)
    pos = keyed_positions(key.seed, key.block_size, b.size)
    rounds = 0
    while True:
        img = _modulated(host, b, key, ha, gain).quantized(maxval)
        rounds += 1
        if key.alpha == 0.0:
            return QuantizedEmbedding(img, gain, 0, rounds)
        r = read_ratios(img, ha, pos)
        ok = np.isfinite(r) & (np.abs(r - 1.0) >= ERASURE_TOL) & ((r > 1.0) == (b == 1))
        if ok.all() or rounds == max_rounds:
            return QuantizedEmbedding(img, gain, int((~ok).sum()), rounds)
        gain[~ok] *= 2.0


def read_ratios(marked: Image, analysis: HostAnalysis, positions) -> np.ndarray:
    if marked.shape != analysis.shape:
        raise DimensionError(f"marked image is {marked.shape}, original is {analysis.shape}")
    blk = fft2d(marked)[analysis.key.slices()]
    demod = np.real(blk * np.exp(-1j * analysis.phase))
    ratios = np.full(len(positions), np.nan)
    floor = ERASURE_TOL * max(float(analysis.sigma[0]), np.finfo(float).tiny)
    for j, i in enumerate(positions):
        s = analysis.sigma[i]
        if s > floor:
            ratios[j] = float(analysis.u[:, i] @ demod @ analysis.v[:, i]) / s
    return ratios


def extract(marked: Image, original, key: WatermarkKey, nbits: int) -> list:
    """Recovered bits; ``None`` marks an erasure (no measurable modulation)."""
    if nbits < 1:
        raise UsageError("nbits must be >= 1")
    ha = original if isinstance(original, HostAnalysis) else analyse_host(original, key)
    if (ha.key.block_origin, ha.key.block_size) != (key.block_origin, key.block_size):
        raise UsageError("host analysis was made for a different block")
    pos = keyed_positions(key.seed, key.block_size, nbits)
    out = []
    for r in read_ratios(marked, ha, pos):
        if not np.isfinite(r) or abs(r - 1.0) < ERASURE_TOL:
            out.append(None)
        else:
            out.append(1 if r > 1.0 else 0)
    return out


def similarity(a: Sequence, b: Sequence) -> float:
    """Normalised correlation of the +-1 mapped bits; erasures count as 0."""
    if len(a) != len(b):
        raise UsageError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise UsageError("empty bit strings")

    def pm(v):
        return np.array([0.0 if x is None else (1.0 if x else -1.0) for x in v])

    return float(pm(a) @ pm(b) / len(a))


def psnr(ref: Image, test: Image, peak: float = 1.0) -> float:
    if ref.shape != test.shape:
        raise DimensionError("PSNR needs equal shapes")
    mse = float(np.mean((ref.pixels - test.pixels) ** 2))
    return float("inf") if mse == 0.0 else 10.0 * np.log10(peak * peak / mse)


def bits_from_string(text: str) -> list:
    s = "".join(text.split())
    if not s or set(s) - {"0", "1"}:
        raise UsageError("bit string must contain only 0 and 1")
    return [int(c) for c in s]


def bits_to_string(bits: Sequence) -> str:
    return "".join("?" if b is None else str(int(b)) for b in bits)


def synthetic_host(size: int = 256, seed: int = 0, texture: float = 0.1) -> Image:
    """Test host: a gentle gradient, a few Gaussian blobs and low-pass texture.

    Pixels stay inside [0.02, 0.98] so clamping after embedding is rare.
    """
    _check_pow2((size, size))
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size] / size
    g = 0.5 + 0.1 * (x - 0.5) + 0.1 * (y - 0.5)
    for _ in range(6):
        cy, cx = rng.uniform(0.0, 1.0, 2)
        r = rng.uniform(0.05, 0.2)
        g += rng.uniform(-0.1, 0.1) * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * r * r))
    if texture > 0:
        f = np.arange(size)
        f = np.minimum(f, size - f) / size
        lowpass = np.exp(-(f[:, None] ** 2 + f[None, :] ** 2) / (2 * 0.08**2))
        t = ifft2d(fft2d(rng.standard_normal((size, size))) * lowpass).real
        g += texture * t / t.std()
    return Image(np.clip(g, 0.02, 0.98))

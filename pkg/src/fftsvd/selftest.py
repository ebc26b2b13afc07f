"""Built-in invariant suite behind ``fftsvd selftest``.

Every check is small enough to finish in a few seconds in total.  The
``corrupt-twiddle`` fault hook hands the FFT checks a twiddle table whose
``W^1`` entry is scaled by 1.25; Parseval and oracle equivalence must then
fail.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .cordic import cordic_gain, cordic_rotate, cordic_vector
from .errors import UsageError
from .fixedpoint import Q2_14, quantize_array
from .oracles import dft_naive, svd_oracle
from .sdf import SdfPipeline, fft_block, fft_stream, fixed_fft, latency, simulate_first_output
from .svd import svd
from .twiddle import TwiddleTable, build_twiddle_table, get_table
from .watermark import WatermarkKey, embed, extract, synthetic_host

__all__ = ["FAULTS", "CheckResult", "CHECKS", "run_selftest"]

FAULTS = ("corrupt-twiddle",)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


class _Env:
    def __init__(self, fault: Optional[str]):
        if fault is not None and fault not in FAULTS:
            raise UsageError(f"unknown fault {fault!r}; known: {', '.join(FAULTS)}")
        self.fault = fault
        self.rng = np.random.default_rng(20240601)

    def table(self, n: int) -> TwiddleTable:
        t = get_table(n)
        if self.fault == "corrupt-twiddle" and n >= 8:
            e = t.entries.copy()
            e[1] *= 1.25
            e.setflags(write=False)
            t = TwiddleTable(n, e)
        return t

    def signal(self, *shape) -> np.ndarray:
        return self.rng.uniform(-1, 1, shape) + 1j * self.rng.uniform(-1, 1, shape)


def _twiddle_symmetry(env):
    t = build_twiddle_table(64)
    e = t.entries
    worst = max(abs(abs(e) - 1).max(), abs(e[16:] - (-1j) * e[:16]).max())
    return e[0] == 1 and worst < 1e-12, f"max deviation {worst:.2e}"


def _quantize_round_trip(env):
    x = env.rng.uniform(-1.9, 1.9, 1000)
    raw, _ = quantize_array(x, Q2_14)
    err = float(np.max(np.abs(raw * Q2_14.lsb - x)))
    return err <= Q2_14.lsb / 2, f"max error {err:.2e} (bound {Q2_14.lsb / 2:.2e})"


def _fft_oracle(env):
    worst = 0.0
    for k in range(1, 10):
        n = 1 << k
        x = env.signal(4, n)
        got = fft_block(x, table=env.table(n))
        ref = dft_naive(x)
        worst = max(worst, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
    return worst <= 1e-9, f"max relative error {worst:.2e} over n=2..512"


def _parseval(env):
    n = 64
    x = env.signal(n)
    big = fft_block(x, table=env.table(n))
    lhs, rhs = float(np.sum(np.abs(x) ** 2)), float(np.sum(np.abs(big) ** 2)) / n
    err = abs(lhs - rhs) / lhs
    return err <= 1e-9, f"relative energy mismatch {err:.2e}"


def _linearity(env):
    n = 128
    x, y = env.signal(n), env.signal(n)
    a, b = 0.7 - 0.2j, -1.3 + 0.5j
    t = env.table(n)
    lhs = fft_block(a * x + b * y, table=t)
    rhs = a * fft_block(x, table=t) + b * fft_block(y, table=t)
    err = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))
    return err <= 1e-9, f"max relative error {err:.2e}"


def _stream_batch(env):
    n = 64
    x = 0.9 * env.signal(3, n)
    pipe = SdfPipeline(n, Q2_14, ordering="natural")
    got = np.asarray(fft_stream(pipe, x.ravel())).reshape(3, n)
    ref = fixed_fft(x, Q2_14).values()
    return bool(np.array_equal(got, ref)), f"{int(np.sum(got != ref))} differing words"


def _latency(env):
    bad = [n for n in (8, 16, 64, 256) if simulate_first_output(n) != latency(n)]
    return not bad, "all sizes match" if not bad else f"mismatch at {bad}"


def _fixed_snr(env):
    n = 64
    r = np.sqrt(env.rng.uniform(0, 1, (20, n)))
    x = r * np.exp(2j * np.pi * env.rng.uniform(0, 1, (20, n)))
    res = fixed_fft(x, Q2_14)
    ref = dft_naive(x)
    snr = 10 * math.log10(np.sum(np.abs(ref) ** 2) / np.sum(np.abs(res.spectrum() - ref) ** 2))
    return snr >= 60.0 and not res.overflow, f"SNR {snr:.1f} dB, overflow {res.overflow}"


def _cordic_gain(env):
    ref = math.prod(math.sqrt(1 + 2.0 ** (-2 * i)) for i in range(32))
    err = abs(cordic_gain(32) - ref)
    return err <= 1e-12, f"|K - product| = {err:.2e}"


def _cordic_rotation(env):
    worst = 0.0
    for _ in range(200):
        x, y = env.rng.uniform(-2, 2, 2)
        th = env.rng.uniform(-math.pi, math.pi)
        gx, gy = cordic_rotate(x, y, th, 32)
        c, s = math.cos(th), math.sin(th)
        err = math.hypot(gx - (c * x - s * y), gy - (s * x + c * y)) / max(math.hypot(x, y), 1e-300)
        worst = max(worst, err)
    return worst <= 2.0**-31, f"worst error / |v| = {worst:.2e}"


def _cordic_vectoring(env):
    worst = 0.0
    for _ in range(200):
        x, y = env.rng.uniform(-2, 2, 2)
        m, a = cordic_vector(x, y, 32)
        worst = max(worst, abs(a - math.atan2(y, x)), abs(m - math.hypot(x, y)) / math.hypot(x, y))
    return worst <= 2.0**-31, f"worst angle/magnitude error {worst:.2e}"


def _svd_float(env):
    a = env.rng.standard_normal((8, 6))
    f = svd(a)
    ref = svd_oracle(a)
    sig = float(np.max(np.abs(f.sigma - ref.sigma)) / ref.sigma[0])
    orth = max(f.orthogonality_error())
    rec = f.reconstruction_error(a)
    return max(sig, orth, rec) <= 1e-6, f"sigma {sig:.1e}, orthogonality {orth:.1e}, reconstruction {rec:.1e}"


def _svd_known(env):
    s = svd([[3.0, 0.0], [4.0, 5.0]]).sigma
    err = float(np.max(np.abs(s - [math.sqrt(45), math.sqrt(5)])))
    return err <= 1e-9, f"sigma {s[0]:.12f}, {s[1]:.12f}"


def _svd_fixed(env):
    a = env.rng.standard_normal((6, 6))
    rec = svd(a, fmt=Q2_14).reconstruction_error(a)
    return rec <= 1e-2, f"Q2.14 reconstruction {rec:.2e}"


def _watermark(env):
    host = synthetic_host(64, seed=5)
    key = WatermarkKey(seed=0xC0FFEE, block_origin=(1, 1), block_size=16, alpha=0.05)
    bits = [int(b) for b in env.rng.integers(0, 2, 15)]
    marked = embed(host, bits, key)
    got = extract(marked, host, key, len(bits))
    return got == bits, f"{sum(g != b for g, b in zip(got, bits))} bit errors"


CHECKS: tuple = (
    ("twiddle.symmetry", _twiddle_symmetry),
    ("fixedpoint.round_trip", _quantize_round_trip),
    ("fft.oracle_equivalence", _fft_oracle),
    ("fft.parseval", _parseval),
    ("fft.linearity", _linearity),
    ("fft.stream_batch_bit_exact", _stream_batch),
    ("fft.latency_law", _latency),
    ("fft.fixed_snr_n64", _fixed_snr),
    ("cordic.gain", _cordic_gain),
    ("cordic.rotation_bound", _cordic_rotation),
    ("cordic.vectoring_bound", _cordic_vectoring),
    ("svd.float_vs_oracle", _svd_float),
    ("svd.known_value", _svd_known),
    ("svd.fixed_reconstruction", _svd_fixed),
    ("watermark.round_trip", _watermark),
)


def run_selftest(fault: Optional[str] = None, out=None) -> list:
    """Run every check, print one line each, return the results."""
    out = sys.stdout if out is None else out
    env = _Env(fault)
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(env)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)
    passed = sum(r.ok for r in results)
    print(f"{passed}/{len(results)} properties passed", file=out)
    return results

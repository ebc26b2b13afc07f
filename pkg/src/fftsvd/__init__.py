"""Bit-accurate software model of an FFT/SVD accelerator.

Fixed-point arithmetic, a streaming radix-2 SDF FFT, a CORDIC-driven Jacobi
SVD, an FFT+SVD watermarking pipeline, brute-force oracles and a benchmark
harness.
"""

from .errors import (
    CapacityError,
    ConvergenceError,
    DimensionError,
    FormatMismatchError,
    ParseError,
    UsageError,
)
from .fixedpoint import Q2_14, QComplex, QFormat, QValue, cmul, q_add, q_mul, q_sub, quantize
from .oracles import dft_naive, idft_naive, svd_oracle
from .sdf import SdfPipeline, bit_reverse_permute, fft_block, fft_stream, fixed_fft, latency
from .svd import SvdFactors, svd
from .twiddle import build_twiddle_table, twiddle

__version__ = "0.1.0"

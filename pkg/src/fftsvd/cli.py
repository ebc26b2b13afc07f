"""Command-line front end.

Exit codes: 0 ok, 1 selftest failure, 2 parse error or bad flags,
3 dimension error, 4 fixed-point overflow under --strict, 5 SVD did not
converge (partial factors written with a ``.partial`` suffix), 6 watermark
capacity exceeded.  Data goes to stdout only when no output path is given;
diagnostics always go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import textio
from .bench import BenchConfig, report_emit, run_bench
from .errors import CapacityError, ConvergenceError, DimensionError, UsageError
from .fixedpoint import QFormat
from .oracles import dft_naive, idft_naive
from .pgm import read_pgm, write_pgm
from .sdf import SCALINGS, bit_reverse_permute, fft_block, fixed_fft
from .selftest import FAULTS, run_selftest
from .svd import svd
from .twiddle import is_power_of_two
from .watermark import (
    WatermarkKey,
    bits_from_string,
    bits_to_string,
    embed_quantized,
    extract,
    similarity,
)

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_DIMENSION = 3
EXIT_OVERFLOW = 4
EXIT_CONVERGENCE = 5
EXIT_CAPACITY = 6


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _int_list(text: str) -> list:
    if not text.strip():
        return []
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _origin(text: str) -> tuple:
    parts = _int_list(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("origin must be 'row,col'")
    return tuple(parts)


def _qformat(text: str) -> QFormat:
    try:
        return QFormat.parse(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad seed {text!r}") from exc


# ---------------------------------------------------------------------------


def cmd_fft(args) -> int:
    x = textio.read_vector(args.input)
    n = len(x)
    if args.inverse and args.fixed:
        raise UsageError("--inverse is only available from the float oracle")
    oracle = args.oracle or args.inverse
    if args.size_check:
        if not is_power_of_two(n):
            raise DimensionError(f"length {n} is not a power of two")
        _err(f"length {n} ok")
        return EXIT_OK
    if n == 0:
        raise DimensionError("empty input vector")
    if not oracle and not is_power_of_two(n):
        raise DimensionError(f"length {n} is not a power of two (use --oracle for any length)")
    if args.order == "bitrev" and not is_power_of_two(n):
        raise DimensionError("bit-reversed order needs a power-of-two length")

    rc = EXIT_OK
    if args.inverse:
        y = idft_naive(x)
    elif args.oracle:
        y = dft_naive(x)
    elif args.fixed:
        res = fixed_fft(x, args.fixed, scaling=args.scaling)
        y = res.spectrum()
        _err(f"fixed {args.fixed} scaling={args.scaling} applied scale 1/{n} = {res.scale!r}")
        if res.overflow:
            _err("warning: fixed-point overflow (saturation) occurred")
            if args.strict:
                rc = EXIT_OVERFLOW
    else:
        y = fft_block(x)
    if args.order == "bitrev":
        y = bit_reverse_permute(y)
    textio.write_vector(args.out, y)
    return rc


def cmd_svd(args) -> int:
    a = textio.read_matrix(args.input)
    prefix = Path(args.out) if args.out else Path(args.input).with_suffix("")
    rc = EXIT_OK
    suffix = ""
    try:
        f = svd(a, tol=args.tol, max_sweeps=args.max_sweeps, iters=args.iters, fmt=args.fixed)
    except ConvergenceError as exc:
        _err(f"error: {exc}")
        f, rc, suffix = exc.partial, EXIT_CONVERGENCE, ".partial"
    for name, text in (
        ("U", textio.format_matrix(f.u)),
        ("S", textio.format_reals(f.sigma)),
        ("V", textio.format_matrix(f.v)),
    ):
        with open(f"{prefix}.{name}{suffix}", "w") as fh:
            fh.write(text)
    print(f"sweeps_used {f.sweeps_used}")
    print(f"residual {f.residual!r}")
    return rc


def _key(args) -> WatermarkKey:
    return WatermarkKey(seed=args.seed, block_origin=args.origin, block_size=args.block, alpha=args.alpha)


def _read_bits(path) -> list:
    with open(path) as fh:
        return bits_from_string(fh.read())


def cmd_embed(args) -> int:
    bits = bits_from_string(args.bits_string) if args.bits_string else _read_bits(args.bits)
    host = read_pgm(args.host)
    key = _key(args)
    if len(bits) > key.capacity:
        raise CapacityError(f"{len(bits)} bits exceed the block capacity of {key.capacity}")
    res = embed_quantized(host, bits, key)
    if res.failed:
        _err(f"warning: {res.failed} bits do not survive 8-bit storage")
    write_pgm(args.out, res.image, binary=not args.plain)
    return EXIT_OK


def cmd_extract(args) -> int:
    ref = _read_bits(args.compare) if args.compare else None
    nbits = args.nbits if args.nbits is not None else (len(ref) if ref else None)
    if nbits is None:
        raise UsageError("give --nbits or --compare")
    key = _key(args)
    if nbits > key.capacity:
        raise CapacityError(f"{nbits} bits exceed the block capacity of {key.capacity}")
    marked = read_pgm(args.marked)
    original = read_pgm(args.original)
    got = extract(marked, original, key, nbits)
    text = bits_to_string(got) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if ref is not None:
        if len(ref) != nbits:
            raise UsageError(f"--compare holds {len(ref)} bits, extracted {nbits}")
        _err(f"similarity {similarity(got, ref):.6f}")
    erased = sum(b is None for b in got)
    if erased:
        _err(f"{erased} erasures")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        sizes=args.sizes,
        matrix_dims=args.dims,
        repetitions=args.reps,
        warmup=args.warmup,
        mode=args.mode,
        fmt=args.fixed_format,
        threads=args.threads,
        seed=args.seed,
    )
    report = run_bench(cfg)
    data = report_emit(report, args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    plot = args.plot
    if plot is None and args.out and not args.no_plot:
        plot = str(Path(args.out).with_suffix(".png"))
    if plot and not args.no_plot:
        from .plotting import plot_report

        plot_report(report, plot)
        _err(f"figure written to {plot}")
    for s in report.sections:
        flag = " (low confidence)" if s.low_confidence else ""
        _err(f"{s.name}: speedup {s.speedup:.3g}x{flag}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftest(args.inject_fault)
    return EXIT_OK if all(r.ok for r in results) else EXIT_SELFTEST


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fftsvd", description="Bit-accurate FFT/SVD accelerator model.")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fft", help="transform a complex vector file")
    f.add_argument("input", help="vector file ('-' for stdin)")
    f.add_argument("-o", "--out", help="output vector file (default stdout)")
    f.add_argument("--fixed", type=_qformat, metavar="INT.FRAC", help="run the fixed-point datapath, e.g. 2.14")
    f.add_argument("--scaling", choices=SCALINGS, default="stage", help="fixed-point overflow control")
    f.add_argument("--order", choices=("natural", "bitrev"), default="natural")
    f.add_argument("--oracle", action="store_true", help="use the direct DFT (any length)")
    f.add_argument("--inverse", action="store_true", help="inverse transform (oracle only)")
    f.add_argument("--size-check", action="store_true", help="only validate the length")
    f.add_argument("--strict", action="store_true", help="exit 4 if the fixed datapath saturated")
    f.set_defaults(func=cmd_fft)

    s = sub.add_parser("svd", help="factor a matrix file into U, S, V files")
    s.add_argument("input")
    s.add_argument("-o", "--out", help="output prefix (default: input path without suffix)")
    s.add_argument("--tol", type=float, default=None, help="off-diagonal threshold relative to ||A||_F")
    s.add_argument("--max-sweeps", type=int, default=30)
    s.add_argument("--iters", type=int, default=None, help="CORDIC iterations")
    s.add_argument("--fixed", type=_qformat, metavar="INT.FRAC")
    s.set_defaults(func=cmd_svd)

    def key_flags(q):
        q.add_argument("--seed", type=_seed, required=True, help="64-bit key seed")
        q.add_argument("--alpha", type=float, default=0.05)
        q.add_argument("--block", type=int, default=32)
        q.add_argument("--origin", type=_origin, default=(1, 1), metavar="ROW,COL")

    e = sub.add_parser("embed", help="embed a bit string into a PGM image")
    e.add_argument("host")
    e.add_argument("-o", "--out", required=True)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--bits", help="file holding the 0/1 payload")
    g.add_argument("--bits-string", help="payload given inline")
    e.add_argument("--plain", action="store_true", help="write plain (P2) PGM")
    key_flags(e)
    e.set_defaults(func=cmd_embed)

    x = sub.add_parser("extract", help="recover bits from a marked image and its original")
    x.add_argument("marked")
    x.add_argument("original")
    x.add_argument("--nbits", type=int)
    x.add_argument("--compare", "--bits", dest="compare", help="reference payload; prints similarity")
    x.add_argument("-o", "--out")
    key_flags(x)
    x.set_defaults(func=cmd_extract)

    b = sub.add_parser("bench", help="time accelerated paths against the oracles")
    b.add_argument("--sizes", type=_int_list, default=[256, 1024], help="FFT sizes, e.g. 256,1024")
    b.add_argument("--dims", type=_int_list, default=[], help="SVD sizes, e.g. 8,16 (default none)")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--warmup", type=int, default=1)
    b.add_argument("--mode", choices=("float", "fixed"), default="float")
    b.add_argument("--fixed-format", type=_qformat, default=QFormat(2, 14), metavar="INT.FRAC")
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out", help="report path (default stdout); a .png figure is written beside it")
    b.add_argument("--plot", help="figure path (overrides the default beside --out)")
    b.add_argument("--no-plot", action="store_true")
    b.add_argument("--threads", action="store_true", help="run sizes on separate threads")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)

    t = sub.add_parser("selftest", help="run the built-in invariant suite")
    t.add_argument("--inject-fault", choices=FAULTS, default=None, help="test hook: break a component on purpose")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        _err(f"error: {exc}")
        return EXIT_CAPACITY
    except DimensionError as exc:
        _err(f"error: {exc}")
        return EXIT_DIMENSION
    except UsageError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

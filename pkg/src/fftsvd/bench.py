"""Wall-clock comparison of the accelerated paths against the naive oracles.

Each section times one operation at one size: ``fft_block`` against
``dft_naive`` and ``svd`` against ``svd_oracle``, on identical seeded inputs.
The report has the eight metric rows of the hardware/software comparison
table, in its order.  Resource rows are always ``N/A`` in software; power and
efficiency are filled only when the host exposes an energy counter (Linux
RAPL), otherwise they are ``N/A`` too.

``ratio`` is always accelerated / naive.  ``speedup`` is naive time /
accelerated time.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParseError, UsageError
from .fixedpoint import Q2_14, QFormat
from .oracles import dft_naive, svd_oracle
from .sdf import fft_block, latency, simulate_first_output
from .svd import svd
from .twiddle import is_power_of_two

__all__ = [
    "NA",
    "METRICS",
    "CSV_HEADER",
    "BenchConfig",
    "OpRecord",
    "BenchSection",
    "BenchReport",
    "EnergyCounter",
    "run_bench",
    "report_emit",
    "report_parse",
]

NA = "N/A"
CSV_HEADER = ("metric", "accelerated", "naive", "ratio")
METRICS = (
    ("calc_speed_us", "Calculation Speed (us)"),
    ("latency_us", "Latency (us)"),
    ("throughput_ops_per_sec", "Throughput (ops/sec)"),
    ("efficiency_ops_per_watt", "Efficiency (ops/Watt)"),
    ("resource_luts", "Resource Usage (LUTs)"),
    ("resource_ffs", "Resource Usage (FFs)"),
    ("resource_dsps", "Resource Usage (DSPs)"),
    ("power_watts", "Power Consumption (Watts)"),
)
_RAPL = "/sys/class/powercap/intel-rapl:0"


@dataclass
class BenchConfig:
    sizes: tuple = (256, 1024)
    matrix_dims: tuple = (8, 16)
    repetitions: int = 5
    warmup: int = 1
    mode: str = "float"
    fmt: QFormat = Q2_14
    pipeline_regs: int = 1
    threads: bool = False
    seed: int = 0
    simulate_cycles: bool = True

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        self.matrix_dims = tuple(int(k) for k in self.matrix_dims)
        if self.repetitions < 3:
            raise UsageError("repetitions must be >= 3")
        if self.warmup < 0:
            raise UsageError("warmup must be >= 0")
        if self.mode not in ("float", "fixed"):
            raise UsageError("mode must be 'float' or 'fixed'")
        for n in self.sizes:
            if not is_power_of_two(n) or n < 2:
                raise UsageError(f"FFT size {n} is not a power of two >= 2")
        for k in self.matrix_dims:
            if k < 1:
                raise UsageError(f"matrix size {k} must be >= 1")


@dataclass
class OpRecord:
    calc_speed_us: float
    latency_us: float
    throughput_ops_per_sec: float
    efficiency_ops_per_watt: Optional[float] = None
    power_watts: Optional[float] = None
    # no software analogue; kept so every metric row has a field
    resource_luts: Optional[float] = None
    resource_ffs: Optional[float] = None
    resource_dsps: Optional[float] = None

    def value(self, key: str) -> Optional[float]:
        return getattr(self, key)


@dataclass
class BenchSection:
    op: str
    size: int
    mode: str
    accelerated: OpRecord
    naive: OpRecord
    latency_cycles: Optional[int] = None
    low_confidence: bool = False

    @property
    def name(self) -> str:
        return f"{self.op} n={self.size}"

    @property
    def speedup(self) -> float:
        return self.naive.calc_speed_us / self.accelerated.calc_speed_us

    def rows(self) -> list:
        out = []
        for key, label in METRICS:
            a, b = self.accelerated.value(key), self.naive.value(key)
            ratio = a / b if a is not None and b else None
            out.append((label, a, b, ratio))
        return out


@dataclass
class BenchReport:
    sections: list = field(default_factory=list)
    timer: str = "perf_counter"
    timer_resolution_s: float = 0.0
    energy_counter: Optional[str] = None

    def section(self, op: str, size: int) -> BenchSection:
        for s in self.sections:
            if s.op == op and s.size == size:
                return s
        raise KeyError(f"{op} n={size}")


class EnergyCounter:
    """Cumulative package energy from Linux RAPL, when readable."""

    def __init__(self, root: str = _RAPL):
        self.path = os.path.join(root, "energy_uj")
        self.wrap = None
        try:
            self.read()
            with open(os.path.join(root, "max_energy_range_uj")) as fh:
                self.wrap = int(fh.read())
            self.available = True
        except (OSError, ValueError):
            self.available = False

    def read(self) -> int:
        with open(self.path) as fh:
            return int(fh.read())

    def joules(self, start: int, stop: int) -> float:
        d = stop - start
        if d < 0 and self.wrap:
            d += self.wrap
        return d * 1e-6


def _time_op(fn: Callable, arg, reps: int, warmup: int, energy: Optional[EnergyCounter]) -> tuple:
    for _ in range(warmup):
        fn(arg)
    times = []
    e0 = energy.read() if energy else None
    t_start = time.perf_counter()
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(arg)
        times.append(time.perf_counter() - t0)
    wall = time.perf_counter() - t_start
    mean_us = statistics.fmean(times) * 1e6
    rec = OpRecord(
        calc_speed_us=mean_us,
        latency_us=statistics.median(times) * 1e6,
        throughput_ops_per_sec=1e6 / mean_us,
    )
    if energy is not None:
        j = energy.joules(e0, energy.read())
        if j > 0 and wall > 0:
            rec.power_watts = j / wall
            rec.efficiency_ops_per_watt = rec.throughput_ops_per_sec / rec.power_watts
    return rec, mean_us


def _fft_section(cfg: BenchConfig, n: int, energy, resolution: float) -> BenchSection:
    rng = np.random.default_rng([cfg.seed, n])
    x = (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)) * 0.7
    fmt = cfg.fmt if cfg.mode == "fixed" else None
    acc, acc_mean = _time_op(lambda v: fft_block(v, fmt), x, cfg.repetitions, cfg.warmup, energy)
    nai, nai_mean = _time_op(dft_naive, x, cfg.repetitions, cfg.warmup, energy)
    cycles = simulate_first_output(n, cfg.pipeline_regs) if cfg.simulate_cycles else latency(n, cfg.pipeline_regs)
    low = resolution * 1e6 > 0.1 * min(acc_mean, nai_mean)
    return BenchSection("fft", n, cfg.mode, acc, nai, cycles, low)


def _svd_section(cfg: BenchConfig, k: int, energy, resolution: float) -> BenchSection:
    rng = np.random.default_rng([cfg.seed, k, 1])
    a = rng.standard_normal((k, k))
    fmt = cfg.fmt if cfg.mode == "fixed" else None
    acc, acc_mean = _time_op(lambda m: svd(m, fmt=fmt), a, cfg.repetitions, cfg.warmup, energy)
    nai, nai_mean = _time_op(svd_oracle, a, cfg.repetitions, cfg.warmup, energy)
    low = resolution * 1e6 > 0.1 * min(acc_mean, nai_mean)
    return BenchSection("svd", k, cfg.mode, acc, nai, None, low)


def run_bench(cfg: BenchConfig, energy: Optional[EnergyCounter] = None) -> BenchReport:
    """Time every configured size; sections come out FFT sizes first, then SVD."""
    if energy is None:
        probe = EnergyCounter()
        energy = probe if probe.available else None
    resolution = time.get_clock_info("perf_counter").resolution
    jobs = [(_fft_section, n) for n in cfg.sizes] + [(_svd_section, k) for k in cfg.matrix_dims]
    if cfg.threads and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            futures = [pool.submit(fn, cfg, arg, energy, resolution) for fn, arg in jobs]
            sections = [f.result() for f in futures]
    else:
        sections = [fn(cfg, arg, energy, resolution) for fn, arg in jobs]
    return BenchReport(sections, "perf_counter", resolution, energy.path if energy else None)


def _cell(v: Optional[float]) -> str:
    return NA if v is None else repr(float(v))


def _emit_csv(r: BenchReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in r.sections:
        cyc = NA if s.latency_cycles is None else s.latency_cycles
        buf.write(
            f"# {s.name} mode={s.mode} speedup={s.speedup:.6g} latency_cycles={cyc} "
            f"low_confidence={str(s.low_confidence).lower()}\n"
        )
        for label, a, b, ratio in s.rows():
            w.writerow((label, _cell(a), _cell(b), _cell(ratio)))
    return buf.getvalue()


def _record_json(rec: OpRecord) -> dict:
    return {k: (NA if v is None else v) for k, v in asdict(rec).items()}


def _emit_json(r: BenchReport) -> str:
    doc = {
        "columns": list(CSV_HEADER),
        "metrics": [label for _, label in METRICS],
        "timer": r.timer,
        "timer_resolution_s": r.timer_resolution_s,
        "energy_counter": NA if r.energy_counter is None else r.energy_counter,
        "sections": [
            {
                "op": s.op,
                "size": s.size,
                "mode": s.mode,
                "latency_cycles": NA if s.latency_cycles is None else s.latency_cycles,
                "low_confidence": s.low_confidence,
                "speedup": s.speedup,
                "accelerated": _record_json(s.accelerated),
                "naive": _record_json(s.naive),
                "rows": [[label, _cell(a), _cell(b), _cell(ratio)] for label, a, b, ratio in s.rows()],
            }
            for s in r.sections
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def report_emit(r: BenchReport, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        return _emit_csv(r).encode()
    if fmt == "json":
        return _emit_json(r).encode()
    raise UsageError(f"unknown report format {fmt!r}")


def _na(v):
    return None if v == NA else v


def report_parse(data, fmt: str = "json") -> BenchReport:
    """Inverse of :func:`report_emit` for JSON."""
    if fmt != "json":
        raise UsageError("only JSON reports can be parsed back")
    try:
        doc = json.loads(data)
        sections = []
        for s in doc["sections"]:
            acc = OpRecord(**{k: _na(v) for k, v in s["accelerated"].items()})
            nai = OpRecord(**{k: _na(v) for k, v in s["naive"].items()})
            sections.append(
                BenchSection(s["op"], s["size"], s["mode"], acc, nai, _na(s["latency_cycles"]), s["low_confidence"])
            )
        return BenchReport(sections, doc["timer"], doc["timer_resolution_s"], _na(doc["energy_counter"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed report: {exc}") from exc

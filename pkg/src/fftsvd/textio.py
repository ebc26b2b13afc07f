"""Plain-text matrix and complex-vector files.

Matrix file: first line ``rows cols``, then ``rows*cols`` reals in row-major
order (any whitespace).  Vector file: first line ``n``, then ``n`` lines of
``re im``; a line with a single number is read as a real sample.  Values are
written as the shortest decimal that reads back to the same double, so a
write/read cycle is exact.
"""

from __future__ import annotations

import sys

import numpy as np

from .errors import ParseError

__all__ = [
    "parse_matrix",
    "format_matrix",
    "parse_vector",
    "format_vector",
    "read_matrix",
    "write_matrix",
    "read_vector",
    "write_vector",
    "format_reals",
]


def _num(tok: str) -> float:
    try:
        v = float(tok)
    except ValueError as exc:
        raise ParseError(f"not a number: {tok!r}") from exc
    if not np.isfinite(v):
        raise ParseError(f"non-finite value {tok!r}")
    return v


def _count(tok: str, what: str) -> int:
    try:
        v = int(tok)
    except ValueError as exc:
        raise ParseError(f"bad {what}: {tok!r}") from exc
    if v < 0:
        raise ParseError(f"negative {what}")
    return v


def _g(v: float) -> str:
    # shortest text that reads back to the same double; integers without ".0"
    s = repr(float(v)) if v != 0 else "0"
    return s[:-2] if s.endswith(".0") else s


def parse_matrix(text: str) -> np.ndarray:
    toks = text.split()
    if len(toks) < 2:
        raise ParseError("matrix file needs a 'rows cols' header")
    rows, cols = _count(toks[0], "row count"), _count(toks[1], "column count")
    if rows < 1 or cols < 1:
        raise ParseError("matrix must have at least one row and column")
    body = toks[2:]
    if len(body) != rows * cols:
        raise ParseError(f"expected {rows * cols} values, found {len(body)}")
    return np.array([_num(t) for t in body]).reshape(rows, cols)


def format_matrix(a) -> str:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines += [" ".join(_g(v) for v in row) for row in a]
    return "\n".join(lines) + "\n"


def parse_vector(text: str) -> np.ndarray:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 1:
        raise ParseError("vector file needs a count on its first line")
    n = _count(lines[0][0], "length")
    body = lines[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} samples, found {len(body)}")
    out = np.empty(n, dtype=complex)
    for i, parts in enumerate(body):
        if len(parts) == 1:
            out[i] = _num(parts[0])
        elif len(parts) == 2:
            out[i] = complex(_num(parts[0]), _num(parts[1]))
        else:
            raise ParseError(f"sample line {i + 2} has {len(parts)} fields")
    return out


def format_vector(v) -> str:
    v = np.asarray(v, dtype=complex).ravel()
    lines = [str(len(v))] + [f"{_g(z.real)} {_g(z.imag)}" for z in v]
    return "\n".join(lines) + "\n"


def format_reals(v) -> str:
    """Count line then one real per line (singular-value files)."""
    v = np.asarray(v, dtype=float).ravel()
    return "\n".join([str(len(v))] + [_g(x) for x in v]) + "\n"


def _read(path) -> str:
    if str(path) == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def read_matrix(path) -> np.ndarray:
    return parse_matrix(_read(path))


def write_matrix(path, a) -> None:
    _write(path, format_matrix(a))


def read_vector(path) -> np.ndarray:
    return parse_vector(_read(path))


def write_vector(path, v) -> None:
    _write(path, format_vector(v))

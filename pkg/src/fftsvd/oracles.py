"""Brute-force double-precision references.

Nothing here is fast on purpose.  The DFT is a direct sum over all ``n``
(written as one matrix product, with the exponentials taken from an exact
``k*n mod N`` index so large arguments do not lose phase).  The SVD is a
Householder QR followed by classical two-sided Jacobi: each 2x2 block is first
symmetrised by one rotation, then diagonalised by the symmetric Schur rotation.
It shares no code with the CORDIC engine.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, UsageError
from .svd import SvdFactors

__all__ = ["dft_naive", "idft_naive", "svd_oracle", "householder_qr"]

_CHUNK = 1 << 22  # entries of the kernel matrix built at once


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] == 0:
        raise UsageError("transform of an empty sequence")
    return x


def _roots(n: int, sign: float) -> np.ndarray:
    # exp(sign*2j*pi*m/n) split into whole quarter turns (exact powers of i)
    # and a remainder below pi/2, so the axis points come out exact
    m4 = 4 * np.arange(n)
    quarter = (1j * sign) ** (m4 // n % 4)
    rem = np.exp(sign * 0.5j * np.pi * (m4 % n) / n)
    return quarter * rem


def _direct_sum(x: np.ndarray, sign: float) -> np.ndarray:
    n = x.shape[-1]
    roots = _roots(n, sign)
    idx = np.arange(n)
    out = np.empty(x.shape, dtype=complex)
    rows = max(1, _CHUNK // n)
    for k0 in range(0, n, rows):
        k = idx[k0 : k0 + rows]
        kernel = roots[np.outer(k, idx) % n]
        out[..., k0 : k0 + len(k)] = x @ kernel.T
    return out


def dft_naive(x) -> np.ndarray:
    """X[k] = sum_n x[n] exp(-2j pi k n / N), along the last axis, any length."""
    return _direct_sum(_as_signal(x), -1.0)


def idft_naive(X) -> np.ndarray:
    """x[n] = (1/N) sum_k X[k] exp(+2j pi k n / N)."""
    X = _as_signal(X)
    return _direct_sum(X, 1.0) / X.shape[-1]


def householder_qr(a):
    """Full QR by Householder reflections: ``a = q @ r``, q is m x m."""
    r = np.array(a, dtype=float)
    m, n = r.shape
    q = np.eye(m)
    for j in range(min(n, m - 1)):
        x = r[j:, j]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(nx, x[0])
        v /= np.linalg.norm(v)
        r[j:, :] -= 2.0 * np.outer(v, v @ r[j:, :])
        q[:, j:] -= 2.0 * np.outer(q[:, j:] @ v, v)
        r[j + 1 :, j] = 0.0
    return q, r


def _rot(c: float, s: float) -> np.ndarray:
    return np.array([[c, s], [-s, c]])


def _sym_schur(a: float, b: float, d: float):
    """(c, s) with [[c, s], [-s, c]]^T [[a, b], [b, d]] [[c, s], [-s, c]] diagonal."""
    if abs(b) <= 1e-300 * max(abs(a), abs(d), 1.0):
        return 1.0, 0.0
    zeta = (d - a) / (2.0 * b)
    t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
    c = 1.0 / math.hypot(1.0, t)
    return c, t * c


def _jacobi_2x2(blk: np.ndarray):
    """Left and right 2x2 rotations with ``L.T @ blk @ R`` diagonal."""
    a, b, c, d = blk.ravel()
    phi = math.atan2(b - c, a + d)
    g = _rot(math.cos(phi), math.sin(phi))
    sym = g.T @ blk
    cs, sn = _sym_schur(sym[0, 0], 0.5 * (sym[0, 1] + sym[1, 0]), sym[1, 1])
    k = _rot(cs, sn)
    return g @ k, k


def svd_oracle(a, tol: float = 1e-13, max_sweeps: int = 60) -> SvdFactors:
    """Reference SVD; ``tol`` is the off-diagonal threshold relative to ``||A||_F``."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise UsageError("svd_oracle needs a non-empty 2-D matrix")
    m, n = a.shape
    if m < n:
        f = svd_oracle(a.T, tol, max_sweeps)
        return SvdFactors(f.v, f.sigma, f.u, f.sweeps_used, f.residual, f.history)
    q, r = householder_qr(a)
    w = r[:n, :n].copy()
    u = np.eye(n)
    v = np.eye(n)
    norm = float(np.linalg.norm(a))

    mask = ~np.eye(n, dtype=bool)

    def off():
        return float(np.sqrt(np.sum(w[mask] ** 2)))

    history = [off()]
    while history[-1] > tol * norm:
        if len(history) > max_sweeps:
            raise ConvergenceError(
                f"oracle did not converge in {max_sweeps} sweeps", residual=history[-1],
                partial=SvdFactors(q, np.diag(w).copy(), v, max_sweeps, history[-1], tuple(history)),
            )
        for p in range(n - 1):
            for s in range(p + 1, n):
                if w[p, s] == 0.0 and w[s, p] == 0.0:
                    continue
                ix = [p, s]
                left, right = _jacobi_2x2(w[np.ix_(ix, ix)])
                w[ix, :] = left.T @ w[ix, :]
                w[:, ix] = w[:, ix] @ right
                w[p, s] = w[s, p] = 0.0
                u[:, ix] = u[:, ix] @ left
                v[:, ix] = v[:, ix] @ right
        history.append(off())

    sigma = np.diag(w).copy()
    neg = sigma < 0
    sigma[neg] = -sigma[neg]
    u[:, neg] *= -1.0
    order = np.argsort(-sigma, kind="stable")
    full_u = q.copy()
    full_u[:, :n] = q[:, :n] @ u[:, order]
    return SvdFactors(full_u, sigma[order], v[:, order], len(history) - 1, history[-1], tuple(history))

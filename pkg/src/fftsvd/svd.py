"""Two-sided Jacobi SVD driven by CORDIC.

For every pivot pair ``(p, q)`` the 2x2 block ``[[a, b], [c, d]]`` goes through
a sum/difference pre-stage, ``(d - a, c + b)`` and ``(d + a, c - b)``.  Two
vectoring CORDICs turn those into angles, and their half-sum and half-difference
are the left and right rotation angles.  Rotation CORDICs then apply them to
rows ``p, q`` (and to the columns of ``U``) and to columns ``p, q`` (and the
columns of ``V``).  Sweeps run cyclically by rows until the off-diagonal norm
drops below the threshold.

Rectangular input is first reduced to a square triangular block by a complete
QR factorisation.  The Q factor also completes ``U`` to a full ``m x m`` basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cordic import FixedCordic, cordic_vector, default_iters, rotation_coefficients
from .errors import ConvergenceError, UsageError
from .fixedpoint import QFormat, quantize_array, round_shift

__all__ = [
    "SvdFactors",
    "svd",
    "jacobi_angles_2x2",
    "apply_two_sided_rotation",
    "off_diagonal_norm",
    "finalize_factors",
]

_TINY = 1e-300


@dataclass
class SvdFactors:
    """``A = U @ diag(sigma) @ V.T`` with ``U`` m x m and ``V`` n x n."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    sweeps_used: int = 0
    residual: float = 0.0
    history: tuple = field(default_factory=tuple)

    def reconstruct(self) -> np.ndarray:
        k = len(self.sigma)
        return (self.u[:, :k] * self.sigma) @ self.v[:, :k].T

    def orthogonality_error(self) -> tuple:
        eu = np.max(np.abs(self.u.T @ self.u - np.eye(self.u.shape[1])))
        ev = np.max(np.abs(self.v.T @ self.v - np.eye(self.v.shape[1])))
        return float(eu), float(ev)

    def reconstruction_error(self, a) -> float:
        a = np.asarray(a, dtype=float)
        return float(np.linalg.norm(a - self.reconstruct()) / max(np.linalg.norm(a), np.finfo(float).tiny))


def off_diagonal_norm(m) -> float:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise UsageError("off-diagonal norm needs a square matrix")
    off = m.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.sqrt(np.sum(off * off)))


def jacobi_angles_2x2(a: float, b: float, c: float, d: float, iters: int = 32):
    """Left/right angles that diagonalise ``[[a, b], [c, d]]``.

    With ``J(t) = [[cos t, sin t], [-sin t, cos t]]`` the product
    ``J(left).T @ M @ J(right)`` is diagonal.
    """
    phi_sum = _vector_angle(d - a, c + b, iters)
    phi_diff = _vector_angle(d + a, c - b, iters)
    return 0.5 * (phi_sum - phi_diff), 0.5 * (phi_sum + phi_diff)


def _vector_angle(x: float, y: float, iters: int) -> float:
    if abs(x) < _TINY and abs(y) < _TINY:
        return 0.0
    if y == 0.0 and x > 0.0:
        return 0.0  # already on the axis; bypass the CORDIC
    return cordic_vector(x, y, iters)[1]


def _rotate_pair(x: np.ndarray, y: np.ndarray, c: float, s: float):
    return c * x - s * y, s * x + c * y


def apply_two_sided_rotation(m, p, q, theta_left, theta_right, accum_u, accum_v, iters: int = 32):
    """Rotate rows p, q of ``m`` by ``theta_left`` and columns p, q by ``theta_right``.

    The same rotations are accumulated into the columns of ``accum_u`` and
    ``accum_v``.  All three arrays are updated in place and returned.
    """
    k = min(m.shape)
    if not (0 <= p < q < k):
        raise UsageError(f"pivot pair ({p}, {q}) invalid for a {k}x{k} working block")
    # a zero angle bypasses its rotation CORDICs entirely
    if theta_left != 0.0:
        c, s = rotation_coefficients(theta_left, iters)
        m[p], m[q] = _rotate_pair(m[p].copy(), m[q].copy(), c, s)
        up, uq = _rotate_pair(accum_u[:, p].copy(), accum_u[:, q].copy(), c, s)
        accum_u[:, p], accum_u[:, q] = up, uq
    if theta_right != 0.0:
        c, s = rotation_coefficients(theta_right, iters)
        mp, mq = _rotate_pair(m[:, p].copy(), m[:, q].copy(), c, s)
        m[:, p], m[:, q] = mp, mq
        vp, vq = _rotate_pair(accum_v[:, p].copy(), accum_v[:, q].copy(), c, s)
        accum_v[:, p], accum_v[:, q] = vp, vq
    return m, accum_u, accum_v


def finalize_factors(diag, u, v):
    """Make singular values non-negative (flipping U columns) and sort descending."""
    diag = np.array(diag, dtype=float)
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    k = len(diag)
    neg = diag < 0
    diag[neg] = -diag[neg]
    u[:, np.flatnonzero(neg)] *= -1.0
    order = np.argsort(-diag, kind="stable")
    u[:, :k] = u[:, :k][:, order]
    v[:, :k] = v[:, :k][:, order]
    return diag[order], u, v


def _sweep_float(w, iters, thresh, max_sweeps):
    k = w.shape[0]
    u = np.eye(k)
    v = np.eye(k)
    skip = max(_TINY, thresh / max(k * k, 1))
    history = [off_diagonal_norm(w)]
    while history[-1] > thresh and len(history) <= max_sweeps:
        for p in range(k - 1):
            for q in range(p + 1, k):
                b, c = w[p, q], w[q, p]
                if abs(b) <= skip and abs(c) <= skip:
                    continue
                tl, tr = jacobi_angles_2x2(w[p, p], b, c, w[q, q], iters)
                apply_two_sided_rotation(w, p, q, tl, tr, u, v, iters)
        history.append(off_diagonal_norm(w))
    return np.diag(w).copy(), u, v, history


def _sweep_fixed(w, fmt, iters, thresh, max_sweeps):
    """Jacobi sweeps on raw mantissas; ``w`` is already normalised to unit norm."""
    k = w.shape[0]
    eng = FixedCordic(fmt, iters)
    if not fmt.one_is_representable():
        raise UsageError(f"{fmt} cannot hold the identity; need at least 2 integer bits")
    wr, _ = quantize_array(w, fmt)
    one = 1 << fmt.frac_bits
    ur = np.eye(k, dtype=wr.dtype) * one
    vr = np.eye(k, dtype=wr.dtype) * one
    lsb = fmt.lsb

    def off():
        return off_diagonal_norm(wr.astype(float) * lsb)

    history = [off()]
    while history[-1] > thresh and len(history) <= max_sweeps:
        if len(history) >= 3 and history[-1] > 0.99 * history[-2]:
            break  # at the quantisation floor; more sweeps only add rounding
        for p in range(k - 1):
            for q in range(p + 1, k):
                a, b, c, d = int(wr[p, p]), int(wr[p, q]), int(wr[q, p]), int(wr[q, q])
                if b == 0 and c == 0:
                    continue
                # sum/difference pre-stage, halved to stay inside the word
                s_x, s_y = round_shift(d - a, 1), round_shift(c + b, 1)
                t_x, t_y = round_shift(d + a, 1), round_shift(c - b, 1)
                phs = eng.vector(s_x, s_y)[1] if (s_x or s_y) else 0
                phd = eng.vector(t_x, t_y)[1] if (t_x or t_y) else 0
                zl = round_shift(phs - phd, 1)
                zr = round_shift(phs + phd, 1)
                x = np.concatenate([wr[p], ur[:, p]])
                y = np.concatenate([wr[q], ur[:, q]])
                x, y = eng.rotate_folded(x, y, zl)
                wr[p], wr[q] = x[:k], y[:k]
                ur[:, p], ur[:, q] = x[k:], y[k:]
                x = np.concatenate([wr[:, p], vr[:, p]])
                y = np.concatenate([wr[:, q], vr[:, q]])
                x, y = eng.rotate_folded(x, y, zr)
                wr[:, p], wr[:, q] = x[:k], y[:k]
                vr[:, p], vr[:, q] = x[k:], y[k:]
        history.append(off())
    return np.diag(wr).astype(float) * lsb, ur.astype(float) * lsb, vr.astype(float) * lsb, history, eng.overflow


def default_tol(k: int, iters: int, fmt: Optional[QFormat]) -> float:
    """Relative off-diagonal threshold reachable at the given CORDIC precision."""
    if fmt is None:
        return max(1e-10, k * 2.0 ** (2 - iters))
    return max(k * 2.0 ** (1 - fmt.frac_bits), k * 2.0 ** (3 - iters))


def svd(
    a,
    tol: Optional[float] = None,
    max_sweeps: int = 30,
    iters: Optional[int] = None,
    fmt: Optional[QFormat] = None,
) -> SvdFactors:
    """CORDIC-Jacobi SVD of a real matrix.

    ``tol`` is relative to ``||A||_F``.  By default it is 1e-10 or, if that
    is looser, a small multiple of the floor set by the CORDIC angle
    resolution (``k * 2**(2 - iters)``).  With ``fmt`` the
    Jacobi sweeps run on the bit-accurate fixed-point datapath (the matrix is
    normalised by its Frobenius norm first and the scale restored at the end).
    Raises :class:`ConvergenceError` (with the partial factors attached) if
    the threshold is not reached within ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise UsageError("svd needs a non-empty 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise UsageError("matrix contains non-finite values")
    if iters is None:
        iters = default_iters(fmt)
    m, n = a.shape
    if m < n:
        try:
            f = svd(a.T, tol, max_sweeps, iters, fmt)
        except ConvergenceError as exc:
            p = exc.partial
            exc.partial = SvdFactors(p.v, p.sigma, p.u, p.sweeps_used, p.residual, p.history)
            raise
        return SvdFactors(f.v, f.sigma, f.u, f.sweeps_used, f.residual, f.history)

    if m > n:
        q_full, r = np.linalg.qr(a, mode="complete")
        work = r[:n, :n].copy()
    else:
        q_full, work = None, a.copy()

    norm = float(np.linalg.norm(a))
    if norm == 0.0:
        return SvdFactors(np.eye(m), np.zeros(n), np.eye(n), 0, 0.0, (0.0,))
    rel = default_tol(n, iters, fmt) if tol is None else float(tol)

    if fmt is None:
        diag, u_w, v, history = _sweep_float(work, iters, rel * norm, max_sweeps)
    else:
        diag, u_w, v, history, _ = _sweep_fixed(work / norm, fmt, iters, rel, max_sweeps)
        diag = diag * norm
        history = [h * norm for h in history]

    diag, u_w, v = finalize_factors(diag, u_w, v)
    if q_full is not None:
        u = q_full.copy()
        u[:, :n] = q_full[:, :n] @ u_w
    else:
        u = u_w
    result = SvdFactors(u, diag, v, len(history) - 1, float(history[-1]), tuple(float(h) for h in history))
    if history[-1] > rel * norm * (1 + 1e-12):
        raise ConvergenceError(
            f"off-diagonal norm {history[-1]:.3e} above {rel * norm:.3e} after {max_sweeps} sweeps",
            residual=float(history[-1]),
            partial=result,
        )
    return result


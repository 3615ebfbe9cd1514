"""Dense complex eigensolver: balancing, Householder-Hessenberg reduction,
implicit single-shift QR to complex Schur form, and eigenvectors of the
triangular factor (right and left).

Eigenvectors are obtained by one step of inverse iteration on the Schur
factor ``T`` started from ``e_i``; for a triangular matrix that step is an
exact back (or forward) substitution with the singular pivot replaced by a
tiny multiple of ``||T||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray  # (n,) complex
    right: np.ndarray  # (n, n) columns, unit 2-norm
    left: np.ndarray  # (n, n) columns, unit 2-norm, left[:, i]^H A = values[i] left[:, i]^H


def balance(a: np.ndarray, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Parlett-Reinsch diagonal scaling by powers of two.

    Returns ``(b, d)`` with ``b = diag(d)^-1 a diag(d)``.
    """
    b = np.array(a, dtype=complex)
    n = b.shape[0]
    d = np.ones(n)
    radix = 2.0
    for _ in range(max_sweeps):
        converged = True
        for i in range(n):
            c = np.sum(np.abs(b[:, i])) - abs(b[i, i])
            r = np.sum(np.abs(b[i, :])) - abs(b[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c >= g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                d[i] *= f
                b[i, :] /= f
                b[:, i] *= f
        if converged:
            break
    return b, d


def hessenberg(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction ``a = q h q^H`` with ``h`` upper Hessenberg."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        h[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, k:])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        q[:, k + 1 :] -= 2.0 * np.outer(q[:, k + 1 :] @ v, v.conj())
    return np.triu(h, -1), q


def _givens(x: complex, y: complex) -> tuple[float, complex]:
    # c real, G = [[c, s], [-conj(s), c]] maps (x, y) to (r, 0)
    ax = abs(x)
    if y == 0:
        return 1.0, 0j
    if ax == 0.0:
        return 0.0, y.conjugate() / abs(y)
    r = math.hypot(ax, abs(y))
    return ax / r, (x / ax) * y.conjugate() / r


def _negligible(t: np.ndarray, k: int, tol: float, floor: float) -> bool:
    # small-subdiagonal test followed by the Ahues-Tisseur product test,
    # which keeps eigenvalues of widely scaled diagonals accurate to ulps
    sub = abs(t[k, k - 1])
    if sub <= floor:
        return True
    a, d = t[k - 1, k - 1], t[k, k]
    scale = abs(a) + abs(d)
    if sub > tol * scale:
        return False
    sup = abs(t[k - 1, k])
    ab, ba = max(sub, sup), min(sub, sup)
    diff = abs(a - d)
    aa, bb = max(abs(d), diff), min(abs(d), diff)
    s = aa + ab
    return ba * (ab / s) <= max(floor, _EPS * (bb * (aa / s)))


def schur(h: np.ndarray, z: np.ndarray, tol: float = 1e-12, max_iter: int | None = None):
    """Complex Schur form of an upper Hessenberg ``h`` (on copies).

    A subdiagonal entry is deflated when it is below ``tol`` relative to its
    diagonal neighbours and also passes the Ahues-Tisseur product test, or
    when it is below the absolute floor ``eps * ||h||_F``.
    """
    t = np.array(h, dtype=complex)
    z = np.array(z, dtype=complex)
    n = t.shape[0]
    if max_iter is None:
        max_iter = 30 * max(n, 1)
    floor = _EPS * max(np.linalg.norm(t), np.finfo(float).tiny)
    hi = n - 1
    its = 0
    total = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            if _negligible(t, lo, tol, floor):
                t[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > max_iter:
            raise ConvergenceError(f"QR iteration did not converge at index {hi}", index=hi)
        if its % 11 == 10:
            shift = t[hi, hi] + 0.75 * abs(t[hi, hi - 1])
        else:
            a_, b_, c_, d_ = t[hi - 1, hi - 1], t[hi - 1, hi], t[hi, hi - 1], t[hi, hi]
            half = 0.5 * (a_ - d_)
            disc = np.sqrt(half * half + b_ * c_)
            mid = 0.5 * (a_ + d_)
            e1, e2 = mid + disc, mid - disc
            shift = e1 if abs(e1 - d_) < abs(e2 - d_) else e2
        for k in range(lo, hi):
            if k == lo:
                x = complex(t[lo, lo] - shift)
                y = complex(t[lo + 1, lo])
            else:
                x = complex(t[k, k - 1])
                y = complex(t[k + 1, k - 1])
            c, s = _givens(x, y)
            g = np.array([[c, s], [-s.conjugate(), c]])
            gh = g.conj().T
            col0 = k - 1 if k > lo else lo
            t[k : k + 2, col0:] = g @ t[k : k + 2, col0:]
            if k > lo:
                t[k + 1, k - 1] = 0.0
            rmax = min(k + 2, hi) + 1
            t[:rmax, k : k + 2] = t[:rmax, k : k + 2] @ gh
            z[:, k : k + 2] = z[:, k : k + 2] @ gh
    return np.triu(t), z


def _safe(den: np.ndarray, small: float) -> np.ndarray:
    den = np.where(den == 0, small, den)
    mag = np.abs(den)
    return np.where(mag < small, den / np.maximum(mag, np.finfo(float).tiny) * small, den)


def triangular_right_vectors(t: np.ndarray) -> np.ndarray:
    """Columns ``x_i`` with ``(t - t_ii) x_i = 0``, ``x_i[i] = 1``, zero below i."""
    n = t.shape[0]
    lam = np.diag(t).copy()
    small = _EPS * max(np.linalg.norm(t), 1.0)
    x = np.eye(n, dtype=complex)
    for j in range(n - 2, -1, -1):
        rhs = t[j, j + 1 :] @ x[j + 1 :, j + 1 :]
        x[j, j + 1 :] = -rhs / _safe(t[j, j] - lam[j + 1 :], small)
    return x


def triangular_left_vectors(t: np.ndarray) -> np.ndarray:
    """Columns ``y_i`` with ``y_i^H (t - t_ii) = 0``, ``y_i[i] = 1``, zero above i."""
    n = t.shape[0]
    lam = np.diag(t).copy()
    small = _EPS * max(np.linalg.norm(t), 1.0)
    y = np.eye(n, dtype=complex)
    for j in range(1, n):
        rhs = t[:j, j].conj() @ y[:j, :j]
        y[j, :j] = -rhs / _safe(np.conj(t[j, j] - lam[:j]), small)
    return y


def eig(a: np.ndarray, tol: float = 1e-12, max_iter: int | None = None, do_balance: bool = True) -> EigenResult:
    """Eigenvalues with right and left eigenvectors of a dense square matrix."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    if n == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return EigenResult(np.zeros(0, dtype=complex), empty, empty)
    if do_balance:
        b, d = balance(a)
    else:
        b, d = a.copy(), np.ones(n)
    h, q = hessenberg(b)
    t, z = schur(h, q, tol=tol, max_iter=max_iter)
    vals = np.diag(t).copy()
    right = d[:, None] * (z @ triangular_right_vectors(t))
    left = (z @ triangular_left_vectors(t)) / d[:, None]
    right /= np.linalg.norm(right, axis=0)
    left /= np.linalg.norm(left, axis=0)
    return EigenResult(vals, right, left)

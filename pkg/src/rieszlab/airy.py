"""Airy function Ai on the real line.

Three regimes:

* ``-MACLAURIN_NEG <= z <= MACLAURIN_POS``: Maclaurin series.
* ``z > MACLAURIN_POS``: ``Ai(z) = sqrt(z/3) K_{1/3}(w) / pi`` with
  ``w = (2/3) z**1.5`` and ``K_{1/3}(w) = int_0^inf exp(-w cosh t) cosh(t/3) dt``
  evaluated by the (exponentially convergent) trapezoidal rule.
* ``z < -MACLAURIN_NEG``: oscillatory Poincare expansion.

The switch points are where the neighbouring regimes agree to about 1e-10.
"""

from __future__ import annotations

import math

import numpy as np

MACLAURIN_POS = 2.0
MACLAURIN_NEG = 7.0

_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_MAI1 = 3.0 ** (-1.0 / 3.0) / math.gamma(1.0 / 3.0)
_N_TERMS = 60
_TRAP_NODES = 80


def _maclaurin(z: np.ndarray) -> np.ndarray:
    z3 = z**3
    f_term = np.ones_like(z)
    g_term = z.copy()
    f_sum = f_term.copy()
    g_sum = g_term.copy()
    for k in range(1, _N_TERMS):
        f_term = f_term * z3 / ((3 * k - 1) * (3 * k))
        g_term = g_term * z3 / ((3 * k) * (3 * k + 1))
        f_sum += f_term
        g_sum += g_term
    return _AI0 * f_sum - _MAI1 * g_sum


def bessel_k13(w: np.ndarray) -> np.ndarray:
    """K_{1/3}(w) for real w > 0 (trapezoidal rule on the cosh integral)."""
    w = np.asarray(w, dtype=float)
    tmax = np.arccosh(1.0 + 45.0 / w)
    h = tmax / (_TRAP_NODES - 1)
    j = np.arange(_TRAP_NODES)
    t = h[..., None] * j
    vals = np.exp(-w[..., None] * (np.cosh(t) - 1.0)) * np.cosh(t / 3.0)
    vals[..., 0] *= 0.5
    return np.exp(-w) * h * vals.sum(axis=-1)


def _positive(z: np.ndarray) -> np.ndarray:
    w = (2.0 / 3.0) * z**1.5
    return np.sqrt(z / 3.0) * bessel_k13(w) / np.pi


def _u_coeffs(n: int) -> np.ndarray:
    u = np.empty(n)
    u[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    return u


_U = _u_coeffs(24)


def _negative(z: np.ndarray) -> np.ndarray:
    x = -z
    xi = (2.0 / 3.0) * x**1.5
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    # u_k / xi^k terms decrease until k ~ 2 xi, far beyond 24 for xi >= 12
    inv = 1.0 / xi
    power = np.ones_like(x)
    for k in range(_U.size):
        term = _U[k] * power
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * term
        else:
            q += sign * term
        power = power * inv
    phase = xi - np.pi / 4.0
    return (np.cos(phase) * p + np.sin(phase) * q) / (np.sqrt(np.pi) * x**0.25)


def airy_ai(z) -> np.ndarray:
    """Ai(z) for real ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    small = (z >= -MACLAURIN_NEG) & (z <= MACLAURIN_POS)
    pos = z > MACLAURIN_POS
    neg = z < -MACLAURIN_NEG
    if small.any():
        out[small] = _maclaurin(z[small])
    if pos.any():
        out[pos] = _positive(z[pos])
    if neg.any():
        out[neg] = _negative(z[neg])
    return out[0] if scalar else out

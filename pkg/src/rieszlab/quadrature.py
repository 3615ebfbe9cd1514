"""Composite Gauss-Legendre quadrature with panel doubling.

All integrands are vectorised callables ``f(x: ndarray) -> ndarray``.
Endpoint inverse-square-root singularities are handled by the substitution
``x = b - s**2`` (or ``x = a + s**2``), which turns ``(b - x)**(-1/2) g(x)``
into the smooth integrand ``2 g(b - s**2)``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

Integrand = Callable[[np.ndarray], np.ndarray]

DEFAULT_ORDER = 20
MAX_DOUBLINGS = 14


@lru_cache(maxsize=16)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(breaks: np.ndarray, order: int = DEFAULT_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Flattened nodes and weights for consecutive panels [breaks[i], breaks[i+1]]."""
    breaks = np.asarray(breaks, dtype=float)
    t, w = gauss_legendre(order)
    lo = breaks[:-1, None]
    half = 0.5 * np.diff(breaks)[:, None]
    nodes = lo + half * (t[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def refine_breaks(breaks: np.ndarray) -> np.ndarray:
    """Split every panel in two."""
    breaks = np.asarray(breaks, dtype=float)
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    out = np.empty(2 * breaks.size - 1)
    out[0::2] = breaks
    out[1::2] = mids
    return out


def fixed_panels(f: Integrand, breaks: np.ndarray, order: int = DEFAULT_ORDER):
    x, w = panel_nodes(breaks, order)
    return np.sum(w * f(x))


def integrate(
    f: Integrand,
    a: float,
    b: float,
    tol: float = 1e-10,
    panels: int = 1,
    order: int = DEFAULT_ORDER,
    breakpoints: Sequence[float] = (),
):
    """Integrate ``f`` over [a, b], doubling panel counts until two successive
    estimates agree to ``tol`` (mixed absolute/relative).

    ``breakpoints`` inside (a, b) are always panel edges, which keeps
    piecewise-smooth integrands (box potentials) at full order.
    """
    if b == a:
        return 0.0
    if b < a:
        return -integrate(f, b, a, tol, panels, order, breakpoints)
    inner = sorted(p for p in breakpoints if a < p < b)
    edges = np.array([a, *inner, b], dtype=float)
    breaks = np.concatenate(
        [np.linspace(lo, hi, panels + 1)[:-1] for lo, hi in zip(edges[:-1], edges[1:])] + [[b]]
    )
    prev = fixed_panels(f, breaks, order)
    for _ in range(MAX_DOUBLINGS):
        breaks = refine_breaks(breaks)
        cur = fixed_panels(f, breaks, order)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(f"no convergence on [{a}, {b}] after {MAX_DOUBLINGS} doublings")


def integrate_sqrt_right(g: Integrand, a: float, b: float, tol: float = 1e-10, order: int = DEFAULT_ORDER):
    """Integral of ``g(x)`` over [a, b] where ``g`` has a square-root type
    singularity at ``b``; uses ``x = b - s**2``."""
    if b <= a:
        return 0.0
    smax = np.sqrt(b - a)
    return integrate(lambda s: 2.0 * s * g(b - s * s), 0.0, smax, tol=tol, panels=2, order=order)


def integrate_sqrt_left(g: Integrand, a: float, b: float, tol: float = 1e-10, order: int = DEFAULT_ORDER):
    """As :func:`integrate_sqrt_right` with the singular endpoint at ``a``."""
    if b <= a:
        return 0.0
    smax = np.sqrt(b - a)
    return integrate(lambda s: 2.0 * s * g(a + s * s), 0.0, smax, tol=tol, panels=2, order=order)

"""Bisection with geometric bracket growth (inputs are monotone by assumption)."""

from __future__ import annotations

from typing import Callable

from .errors import RootFindingError


def grow_bracket(f: Callable[[float], float], lo: float, hi: float, factor: float = 2.0, max_steps: int = 200):
    """Enlarge ``hi`` geometrically until ``f(lo)`` and ``f(hi)`` differ in sign."""
    flo = f(lo)
    fhi = f(hi)
    steps = 0
    while flo * fhi > 0:
        steps += 1
        if steps > max_steps:
            raise RootFindingError(f"could not bracket a root starting from [{lo}, {hi}]")
        lo, flo = hi, fhi
        hi = hi * factor if hi > 0 else hi + factor
        fhi = f(hi)
    return lo, hi


def bisect(f: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-12, max_iter: int = 400) -> float:
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise RootFindingError(f"root not bracketed in [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if abs(hi - lo) <= rtol * max(abs(mid), 1e-300) or mid in (lo, hi):
            return mid
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)

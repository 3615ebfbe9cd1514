"""Eigenvalue enclosures: the strip Pi_0(N, h), the boxes Pi_k, the row-sum
bound on ||B(z)|| and verification against oracle eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models as mdl
from .errors import NotFoundError, ParameterError, SingularError
from .quadrature import gauss_legendre

SAMPLES_PER_SIDE = 64
H_GRID = tuple(2.0**i for i in range(17))
EDGE_FRACTION = 0.1


def _tail_weight(t: np.ndarray, alpha: float) -> np.ndarray:
    # upper bound of k**(-2 alpha) for k in [t, t + 1]
    return t ** (-2 * alpha) if alpha >= 0 else (t + 1) ** (-2 * alpha)


def tail_bound(c: np.ndarray, K: int, alpha: float, kappa: float, gamma: float) -> np.ndarray:
    """Upper bound of ``sum_{k>K} k^(-2 alpha) / D_k`` with
    ``D_k = c + (kappa/gamma)((k-1)^gamma - K^gamma) <= mu_k - Re z``.

    ``c = mu_K - Re z``; requires ``D`` positive on ``[K, inf)``. Terms up to
    ``2K`` are summed explicitly, since ``1/D`` may vary sharply near ``K``.
    Beyond, the sum is dominated by the integral of a majorant: Gauss-Legendre
    on ``[2K, 16K]`` (smooth there) and a closed form past ``16K``.
    """
    c = np.asarray(c, dtype=float)
    if 2 * alpha + gamma <= 1:
        return np.full(c.shape, math.inf)
    a = kappa / gamma
    T = 16.0 * K
    k = np.arange(K + 1, 2 * K + 1, dtype=float)
    off = a * ((k - 1) ** gamma - K**gamma)
    wk = k ** (-2 * alpha)
    flat = c.ravel()
    near = np.empty_like(flat)
    chunk = max(1, 2_000_000 // k.size)
    for s in range(0, flat.size, chunk):
        near[s : s + chunk] = np.sum(wk / (flat[s : s + chunk, None] + off), axis=1)
    total = near.reshape(c.shape)
    t, w = gauss_legendre(20)
    edges = K * 2.0 ** np.arange(1, 5)  # 2K, 4K, 8K, 16K
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes = lo + 0.5 * (hi - lo) * (t + 1)
        den = c[..., None] + a * ((nodes - 1) ** gamma - K**gamma)
        total = total + 0.5 * (hi - lo) * np.sum(w * _tail_weight(nodes, alpha) / den, axis=-1)
    rho = 1.0 - (K / (T - 1)) ** gamma
    wfac = 1.0 if alpha >= 0 else ((T + 1) / T) ** (-2 * alpha)
    far = wfac * (T / (T - 1)) ** gamma * T ** (1 - 2 * alpha - gamma) / (a * rho * (2 * alpha + gamma - 1))
    # c > 0 only helps, so the far piece ignores it
    return total + far


def b_norm_bound(model: mdl.ModelSpec, alpha: float, Mb: float, z, K: int | None = None, n: int | None = None, tol: float = 1e-12):
    """Certified (per point) upper bound ``Mb * sum_k 1/(k^(2 alpha) |mu_k - z|)``.

    ``K`` defaults to ``max(4 n, 1000)`` where ``n`` is the box index the
    points belong to (or 250 when unknown).
    """
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    gamma, kappa = model.gap_gamma, model.gap_kappa
    if not 2 * alpha + gamma > 1:
        raise ParameterError("b_norm_bound needs 2 alpha + gamma > 1")
    if K is None:
        K = max(4 * (n if n is not None else 250), 1000)
    while True:
        mu = model_eigenvalues(model, K)
        c = mu[-1] - zs.real
        head = c + (kappa / gamma) * ((K - 1) ** gamma - K**gamma)
        if np.all(head > 0):
            break
        K *= 2
    k = np.arange(1, K + 1, dtype=float)
    wts = k ** (-2 * alpha)
    out = np.empty(zs.shape, dtype=float)
    chunk = max(1, 2_000_000 // K)
    for s in range(0, zs.size, chunk):
        zz = zs[s : s + chunk]
        dist = np.abs(mu[None, :] - zz[:, None])
        if np.any(dist <= tol * np.maximum(1.0, np.abs(mu[None, :]))):
            raise SingularError("z collides with an unperturbed eigenvalue")
        out[s : s + chunk] = np.sum(wts[None, :] / dist, axis=1)
    out += tail_bound(c, K, alpha, kappa, gamma)
    out *= Mb
    return float(out[0]) if np.ndim(z) == 0 else out


def model_eigenvalues(model: mdl.ModelSpec, K: int) -> np.ndarray:
    if isinstance(model.kind, mdl.DiagonalSequence) and K > len(model.kind.mu):
        # extrapolate with the gap law beyond the supplied sequence
        mu = np.array(model.kind.mu)
        extra = np.arange(len(mu) + 1, K + 1, dtype=float)
        ext = mu[-1] + model.gap_kappa / model.gap_gamma * (extra**model.gap_gamma - len(mu) ** model.gap_gamma)
        return np.concatenate([mu, ext])
    return mdl.eigenvalues(model, K)


@dataclass(frozen=True)
class Box:
    k: int
    re_lo: float
    re_hi: float
    im_half: float

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (self.re_lo - slack <= z.real <= self.re_hi + slack) and abs(z.imag) <= self.im_half + slack

    def boundary(self, per_side: int) -> np.ndarray:
        return _rect_boundary(self.re_lo, self.re_hi, self.im_half, per_side)


def _rect_boundary(re_lo: float, re_hi: float, im_half: float, per_side: int) -> np.ndarray:
    xs = np.linspace(re_lo, re_hi, per_side)
    ys = np.linspace(-im_half, im_half, per_side)
    return np.concatenate([xs + 1j * im_half, xs - 1j * im_half, re_lo + 1j * ys, re_hi + 1j * ys])


def box_for(model: mdl.ModelSpec, k: int, mu_k: float | None = None) -> Box:
    kappa, gamma = model.gap_kappa, model.gap_gamma
    if mu_k is None:
        mu_k = float(model_eigenvalues(model, k)[-1])
    half_l = 0.5 * kappa * (k - 1) ** (gamma - 1)
    half_r = 0.5 * kappa * k ** (gamma - 1)
    return Box(k, mu_k - half_l, mu_k + half_r, half_r)


@dataclass
class EnclosureLayout:
    N: int
    h: float
    kappa: float
    gamma: float
    boxes: list[Box]
    strip_re_hi: float
    max_bound: float = float("nan")
    per_side: int = SAMPLES_PER_SIDE
    box_bounds: dict[int, float] = field(default_factory=dict)
    strip_bound: float = float("nan")

    @property
    def k_max(self) -> int:
        return self.boxes[-1].k if self.boxes else self.N

    def in_strip(self, z: complex, slack: float = 0.0) -> bool:
        return (-self.h - slack < z.real < self.strip_re_hi + slack) and abs(z.imag) < self.h + slack

    def locate(self, z: complex, slack: float = 0.0) -> int | None:
        """0 for the strip, ``k`` for box ``Pi_k``, ``None`` outside the union."""
        if self.in_strip(z, slack):
            return 0
        for b in self.boxes:
            if b.contains(z, slack):
                return b.k
        return None

    def strip_boundary(self, per_side: int) -> np.ndarray:
        return _rect_boundary(-self.h, self.strip_re_hi, self.h, per_side)


def build_layout(model: mdl.ModelSpec, N: int, h: float, k_max: int) -> EnclosureLayout:
    # the strip clears Pi_{N+1} only if the gap bound holds at N
    if N <= model.gap_N0:
        raise ParameterError(f"cutoff N={N} must exceed N0={model.gap_N0}")
    mu = model_eigenvalues(model, k_max)
    boxes = [box_for(model, k, float(mu[k - 1])) for k in range(N + 1, k_max + 1)]
    re_hi = float(mu[N - 1]) + 0.5 * model.gap_kappa * N ** (model.gap_gamma - 1)
    return EnclosureLayout(N, float(h), model.gap_kappa, model.gap_gamma, boxes, re_hi)


def _sampled_max(points_fn, bound_fn, per_side: int, max_doublings: int = 4) -> tuple[float, int]:
    prev = float(np.max(bound_fn(points_fn(per_side))))
    for _ in range(max_doublings):
        per_side *= 2
        cur = float(np.max(bound_fn(points_fn(per_side))))
        if abs(cur - prev) <= 0.01 * max(abs(cur), 1e-300):
            return max(cur, prev), per_side
        prev = max(cur, prev)
    return prev, per_side


def box_bounds(model: mdl.ModelSpec, alpha: float, Mb: float, k_lo: int, k_max: int, per_side: int = SAMPLES_PER_SIDE) -> dict[int, float]:
    """Max sampled bound on the boundary of each box ``Pi_k`` for ``k_lo <= k <= k_max``."""
    mu = model_eigenvalues(model, k_max)
    out: dict[int, float] = {}
    for k in range(k_lo, k_max + 1):
        b = box_for(model, k, float(mu[k - 1]))
        out[k], _ = _sampled_max(b.boundary, lambda z, k=k: b_norm_bound(model, alpha, Mb, z, n=k), per_side)
    return out


def find_enclosure_params(model: mdl.ModelSpec, alpha: float, Mb: float, k_max: int = 360, per_side: int = SAMPLES_PER_SIDE) -> EnclosureLayout:
    """Smallest ``N > N0``, then smallest ``h`` on the grid 1, 2, ..., 2**16, with the
    sampled bound at most 1/2 on every box boundary (``N < k <= k_max``) and on
    the boundary of the strip."""
    gamma = model.gap_gamma
    if not 2 * alpha + gamma > 1:
        raise ParameterError("inadmissible parameters: 2 alpha + gamma <= 1")
    n0 = model.gap_N0
    if k_max <= n0 + 1:
        raise ParameterError("working range too small")
    per_box = box_bounds(model, alpha, Mb, n0 + 2, k_max, per_side)
    ks = sorted(per_box)
    vals = np.array([per_box[k] for k in ks])
    suffix = np.maximum.accumulate(vals[::-1])[::-1]
    N = None
    for i, k in enumerate(ks):
        if suffix[i] <= 0.5:
            N = k - 1
            break
    if N is None:
        raise NotFoundError(f"no cutoff N below {k_max} keeps the bound under 1/2")
    for h in H_GRID:
        layout = build_layout(model, N, h, k_max)
        sb, _ = _sampled_max(layout.strip_boundary, lambda z: b_norm_bound(model, alpha, Mb, z, n=N), per_side)
        if sb <= 0.5:
            layout.strip_bound = sb
            layout.box_bounds = {k: v for k, v in per_box.items() if k > N}
            layout.max_bound = max([sb, *layout.box_bounds.values()])
            layout.per_side = per_side
            return layout
    raise NotFoundError(f"no h up to {H_GRID[-1]:g} keeps the strip bound under 1/2")


@dataclass
class EnclosureReport:
    layout: EnclosureLayout
    counts: dict[int, int]
    strip_count: int
    outside: list[dict]
    truncation: int

    @property
    def one_per_box(self) -> bool:
        return all(c == 1 for c in self.counts.values())

    @property
    def strip_ok(self) -> bool:
        return self.strip_count == self.layout.N

    @property
    def sound(self) -> bool:
        return self.one_per_box and self.strip_ok and not any(not o["edge"] for o in self.outside)

    def to_json(self) -> dict:
        return {
            "N": self.layout.N,
            "h": self.layout.h,
            "boxes": [
                {"k": b.k, "re_lo": b.re_lo, "re_hi": b.re_hi, "im_half": b.im_half, "count": self.counts.get(b.k, 0)}
                for b in self.layout.boxes
            ],
            "strip_count": self.strip_count,
            "outside": self.outside,
        }


def verify_enclosure(layout: EnclosureLayout, eigenvalues, truncation: int | None = None, index_limit: int | None = None) -> EnclosureReport:
    """Count oracle eigenvalues per box and in the strip.

    Eigenvalues are ranked by real part; only the ``index_limit`` lowest are
    checked (default: all). Stragglers whose rank lies in the top 10% of the
    truncation are flagged as edge effects.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    order = np.lexsort((np.abs(lam.imag), lam.real))
    lam = lam[order]
    M = truncation if truncation is not None else lam.size
    limit = index_limit if index_limit is not None else lam.size
    counts = {b.k: 0 for b in layout.boxes}
    strip = 0
    outside = []
    for rank, z in enumerate(lam[:limit], start=1):
        where = layout.locate(complex(z))
        if where == 0:
            strip += 1
        elif where is None:
            outside.append({"rank": rank, "re": float(z.real), "im": float(z.imag), "edge": bool(rank > (1 - EDGE_FRACTION) * M)})
        else:
            counts[where] += 1
    if index_limit is not None:
        counts = {k: c for k, c in counts.items() if k <= index_limit}
    return EnclosureReport(layout, counts, strip, outside, M)

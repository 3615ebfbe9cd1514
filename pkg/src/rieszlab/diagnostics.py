"""Riesz and Bari basis diagnostics, weighted Schur-test sums and the
two-by-two block counterexample at 2 alpha + gamma = 1."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import models as mdl
from .corrections import CorrectionRecord, pair_eigenvalues, projection_norm
from .eigensolver import eig
from .localization import model_eigenvalues

BOUNDED_RTOL = 1e-6


def bari_predicate(alpha: float, gamma: float) -> bool:
    """Sufficient condition for quadratic closeness of the eigenvectors."""
    if alpha <= 0.5:
        return 2 * alpha + gamma > 1.5
    return gamma > 0.5


def loglog_slope(x, y) -> float:
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    if x.size < 2:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class RieszReport:
    sup_proj_norm: float
    proj_slope: float
    bari_partial: float
    bari_predicate: bool
    bari_increment_slope: float
    admissible: bool
    schur_max_row: float = math.nan
    schur_max_col: float = math.nan

    @property
    def bari_trend_converges(self) -> bool:
        # increments ~ n^s are summable iff s < -1; empirical only
        return bool(np.isfinite(self.bari_increment_slope) and self.bari_increment_slope < -1)

    def to_json(self) -> dict:
        return {
            "sup_proj_norm": self.sup_proj_norm,
            "proj_slope": self.proj_slope,
            "bari_partial": self.bari_partial,
            "bari_predicate": self.bari_predicate,
            "admissible": self.admissible,
            "schur_max_row": self.schur_max_row,
            "schur_max_col": self.schur_max_col,
        }


def riesz_report(records: Sequence[CorrectionRecord], alpha: float, gamma: float, floor: float = 1e-14) -> RieszReport:
    """Projection-norm supremum and trend, Bari partial sum with the sufficient
    predicate reported next to the empirical trend of its increments."""
    if not records:
        raise ValueError("no records")
    ns = np.array([r.n for r in records], dtype=float)
    pn = np.array([r.proj_norm for r in records])
    # all-ones (self-adjoint) gives a clean zero slope
    slope = 0.0 if np.all(np.abs(pn - 1) < 1e-12) else loglog_slope(ns, pn)
    inc = np.array([r.phi1_norm**2 for r in records])
    keep = inc > floor
    inc_slope = loglog_slope(ns[keep], inc[keep]) if np.count_nonzero(keep) >= 2 else math.nan
    return RieszReport(
        sup_proj_norm=float(np.max(pn)),
        proj_slope=slope,
        bari_partial=float(np.sum(inc)),
        bari_predicate=bari_predicate(alpha, gamma),
        bari_increment_slope=inc_slope,
        admissible=bool(2 * alpha + gamma > 1),
    )


@dataclass
class CounterexampleResult:
    gamma: float
    t: np.ndarray
    mu: np.ndarray
    operator: np.ndarray
    closed_values: np.ndarray  # (K, 2): minus, plus
    closed_norms: np.ndarray  # (K,) the stated 1/(1 - t^2)
    exact_norms: np.ndarray  # (K,) ||g|| ||g*|| for the block eigenvectors, 1/sqrt(1 - t^2)
    oracle_values: np.ndarray  # (K, 2)
    oracle_norms: np.ndarray  # (K, 2)

    @property
    def value_error(self) -> float:
        return float(np.max(np.abs(self.oracle_values - self.closed_values)))

    @property
    def norm_error(self) -> float:
        return float(np.max(np.abs(self.oracle_norms - self.closed_norms[:, None])))

    @property
    def exact_norm_error(self) -> float:
        return float(np.max(np.abs(self.oracle_norms - self.exact_norms[:, None])))

    def growth_slope(self, upper_fraction: float = 0.5) -> float:
        K = self.t.size
        k = np.arange(1, K + 1)
        lo = int(math.floor((1 - upper_fraction) * K))
        return loglog_slope(k[lo:], self.oracle_norms[lo:].max(axis=1))


def _t_values(t, K: int) -> np.ndarray:
    if callable(t):
        vals = np.array([t(k) for k in range(1, K + 1)], dtype=float)
    elif np.ndim(t) == 0:
        vals = np.full(K, float(t))
    else:
        vals = np.asarray(t, dtype=float)
        if vals.size != K:
            raise ValueError(f"need {K} block parameters, got {vals.size}")
    if np.any(vals < 0) or np.any(vals >= 1):
        raise ValueError("block parameters must lie in [0, 1)")
    return vals


def counterexample_blocks(gamma: float, t: float | Sequence[float] | Callable[[int], float], K: int) -> CounterexampleResult:
    """``mu_k = k^gamma`` with the rotation-like block perturbation on each pair
    ``(2k-1, 2k)``; closed forms cross-checked against the dense eigensolver."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    tk = _t_values(t, K)
    mu = np.arange(1, 2 * K + 1, dtype=float) ** gamma
    d = 0.5 * (mu[1::2] - mu[0::2])
    B = np.zeros((2 * K, 2 * K))
    i = np.arange(K)
    B[2 * i + 1, 2 * i] = -d * tk
    B[2 * i, 2 * i + 1] = d * tk
    tau = np.sqrt(1 - tk**2)
    centre = mu[0::2] + d
    closed = np.stack([centre - d * tau, centre + d * tau], axis=1)
    norms = 1.0 / (1 - tk**2)
    exact = 1.0 / tau
    res = eig(np.diag(mu) + B)
    pairing = pair_eigenvalues(res.values, closed.ravel())
    ov = res.values[pairing].reshape(K, 2)
    on = np.array([projection_norm(res.right[:, c], res.left[:, c]) for c in pairing]).reshape(K, 2)
    return CounterexampleResult(float(gamma), tk, mu, B, closed, norms, exact, ov, on)


def parse_t_expression(expr: str) -> Callable[[int], float]:
    """Block parameter as a constant or one of the forms ``1-1/k``, ``1-c/k``."""
    s = expr.replace(" ", "")
    try:
        c = float(s)
        return lambda k: c
    except ValueError:
        pass
    if s.startswith("1-") and s.endswith("/k"):
        c = float(s[2:-2])
        return lambda k: max(0.0, 1 - c / k)
    raise ValueError(f"unsupported block parameter expression {expr!r}")


@dataclass
class SchurSums:
    max_row: float
    max_col: float
    max_row_doubled: float
    max_col_doubled: float
    argmax_row: int

    @property
    def bounded(self) -> bool:
        """Two-point certificate: doubling the range does not raise the maxima."""
        return bool(
            self.max_row_doubled <= self.max_row * (1 + BOUNDED_RTOL)
            and self.max_col_doubled <= self.max_col * (1 + BOUNDED_RTOL)
        )

    def __iter__(self):
        return iter((self.max_row, self.max_col))


def default_z_pick(model: mdl.ModelSpec, mu: np.ndarray) -> np.ndarray:
    """Right-edge midpoints of the boxes: ``mu_n + (kappa/2) n^(gamma-1)``."""
    n = np.arange(1, mu.size + 1, dtype=float)
    return mu + 0.5 * model.gap_kappa * n ** (model.gap_gamma - 1)


def _schur_sums(mu: np.ndarray, z: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(1, mu.size + 1, dtype=float)
    w = m ** (-2 * alpha)
    # inv[m, n] = 1 / |z_n - mu_m|
    inv = 1.0 / np.abs(z[None, :] - mu[:, None])
    row = w @ inv  # n-indexed: sum_m m^-2a / |z_n - mu_m|
    col = inv @ w  # m-indexed: sum_n n^-2a / |z_n - mu_m|
    return row, col


def schur_row_sums(model: mdl.ModelSpec, alpha: float, z_pick: Callable[[np.ndarray], np.ndarray] | None = None, n_max: int = 400, inner: int | None = None) -> SchurSums:
    """Weighted Schur sums of ``M_mn = 1/(m^a n^a |z_n - mu_m|)`` with weight ``m^-a``,
    normalised by the weight itself. The inner sums run over ``1..inner``
    (default ``8 n_max``); maxima are taken over ``1..n_max`` and ``1..2 n_max``."""
    pick = z_pick if z_pick is not None else (lambda mu: default_z_pick(model, mu))
    L = inner if inner is not None else 8 * n_max
    if L < 2 * n_max:
        raise ValueError("inner range must cover twice the working range")
    mu = model_eigenvalues(model, L)
    z = np.asarray(pick(mu), dtype=complex)
    row, col = _schur_sums(mu, z, alpha)
    return SchurSums(
        float(np.max(row[:n_max])), float(np.max(col[:n_max])),
        float(np.max(row[: 2 * n_max])), float(np.max(col[: 2 * n_max])),
        int(np.argmax(row[:n_max])) + 1,
    )

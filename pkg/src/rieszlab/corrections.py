"""First and second order eigenvalue corrections, the first eigenvector
correction, remainder scalings and the dense Galerkin oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models as mdl
from .eigensolver import eig
from .errors import DegenerateError, ParameterError
from .localization import EnclosureLayout, tail_bound
from .perturbations import FormMatrix

DENSE_LIMIT = 600
GAP_TOL = 1e-12
DEGENERATE_TOL = 1e-14


def _check_index(fm: FormMatrix, n: int) -> None:
    if not 1 <= n <= fm.M:
        raise IndexError(f"index {n} outside 1..{fm.M}")


def lambda1(fm: FormMatrix, n: int) -> complex:
    """``b(psi_n, psi_n)`` at position ``n`` (1-based)."""
    _check_index(fm, n)
    return complex(fm.entries[n - 1, n - 1])


def _denominators(mu, n: int, M: int) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)[:M]
    den = mu[n - 1] - mu
    den[n - 1] = np.inf
    if np.any(np.abs(den) <= GAP_TOL * max(1.0, abs(mu[n - 1]))):
        raise DegenerateError(f"eigenvalue {n} is not simple within tolerance")
    return den


def lambda2(fm: FormMatrix, mu, n: int) -> complex:
    """``sum_{j != n} b(n, j) b(j, n) / (mu_n - mu_j)`` over the truncation."""
    _check_index(fm, n)
    den = _denominators(mu, n, fm.M)
    e = fm.entries
    return complex(np.sum(e[n - 1, :] * e[:, n - 1] / den))


def lambda2_tail(model: mdl.ModelSpec, alpha: float, Mb: float, n: int, M: int, mu_M: float | None = None) -> float:
    """Bound on the neglected part ``j > M`` of the second order sum under
    ``|b(m, j)| <= Mb / (m j)^alpha``."""
    if mu_M is None:
        mu_M = float(mdl.eigenvalues(model, M)[-1])
    mu_n = float(mdl.eigenvalues(model, n)[-1]) if n <= M else math.nan
    c = np.array([mu_M - mu_n])
    kappa, gamma = model.gap_kappa, model.gap_gamma
    if c[0] + (kappa / gamma) * ((M - 1) ** gamma - M**gamma) <= 0:
        return math.inf
    return float(Mb**2 * n ** (-2 * alpha) * tail_bound(c, M, alpha, kappa, gamma)[0])


def phi1(fm: FormMatrix, mu, n: int, floor: float = 0.0) -> list[tuple[int, complex]]:
    """Coefficients ``c_j = b(n, j) / (mu_n - mu_j)`` of the first eigenvector
    correction as ``(j, c_j)`` with ``j != n``; entries with ``|c_j| <= floor`` dropped."""
    _check_index(fm, n)
    den = _denominators(mu, n, fm.M)
    c = fm.entries[n - 1, :] / den
    return [(j + 1, complex(c[j])) for j in range(fm.M) if j != n - 1 and abs(c[j]) > floor]


def phi1_norm(coeffs: list[tuple[int, complex]]) -> float:
    return math.sqrt(sum(abs(c) ** 2 for _, c in coeffs))


def remainder_scale(alpha: float, gamma: float, n, j: int):
    """``sigma_{2 alpha, gamma}(n)^(j+1) / n^(2 alpha)``; a trend indicator only."""
    if not 2 * alpha + gamma > 1:
        raise ParameterError("remainder scale needs 2 alpha + gamma > 1")
    if j < 1:
        raise ParameterError("order j must be at least 1")
    n = np.asarray(n, dtype=float)
    out = mdl.sigma(2 * alpha, gamma, n) ** (j + 1) / n ** (2 * alpha)
    return float(out) if out.ndim == 0 else out


def projection_norm(right, left) -> float:
    """``||r|| ||l|| / |<l, r>|``; at least 1 by Cauchy-Schwarz."""
    r = np.asarray(right, dtype=complex)
    l = np.asarray(left, dtype=complex)
    nr, nl = np.linalg.norm(r), np.linalg.norm(l)
    ip = abs(np.vdot(l, r))
    if ip <= DEGENERATE_TOL * nr * nl or nr == 0 or nl == 0:
        raise DegenerateError("left and right eigenvectors are (numerically) orthogonal")
    # Cauchy-Schwarz gives >= 1; only rounding can push it below
    return max(1.0, float(nr * nl / ip))


@dataclass
class GalerkinSpectrum:
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    mu: np.ndarray
    # pairing[n-1] = column of the eigenvalue assigned to index n, or -1
    pairing: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def paired(self, n: int) -> int:
        col = int(self.pairing[n - 1])
        if col < 0:
            raise DegenerateError(f"no eigenvalue paired with index {n}")
        return col

    def value(self, n: int) -> complex:
        return complex(self.values[self.paired(n)])

    def proj_norm(self, n: int) -> float:
        col = self.paired(n)
        return projection_norm(self.right[:, col], self.left[:, col])


def galerkin_matrix(mu, fm: FormMatrix) -> np.ndarray:
    """Finite section ``diag(mu) + [b(psi_n, psi_j)]_{j n}`` of the perturbed operator."""
    return np.diag(np.asarray(mu, dtype=complex)[: fm.M]) + fm.operator


def index_centres(mu, layout: EnclosureLayout | None) -> np.ndarray:
    c = np.asarray(mu, dtype=complex).copy()
    if layout is not None:
        for b in layout.boxes:
            if b.k <= c.size:
                c[b.k - 1] = 0.5 * (b.re_lo + b.re_hi)
    return c


def pair_eigenvalues(values, centres) -> np.ndarray:
    """Each eigenvalue goes to its nearest centre; a centre claimed by several
    keeps the closest one, then the one with the smaller ``|Im|``."""
    values = np.asarray(values, dtype=complex)
    centres = np.asarray(centres, dtype=complex)
    order = np.argsort(centres.real, kind="stable")
    sc = centres[order]
    pos = np.searchsorted(sc.real, values.real)
    nearest = np.empty(values.size, dtype=int)
    for i, z in enumerate(values):
        cand = [p for p in (pos[i] - 1, pos[i], pos[i] + 1) if 0 <= p < sc.size]
        best = min(cand, key=lambda p: (abs(z - sc[p]), p))
        nearest[i] = order[best]
    pairing = np.full(centres.size, -1, dtype=int)
    for i in sorted(range(values.size), key=lambda i: (abs(values[i] - centres[nearest[i]]), abs(values[i].imag), i)):
        if pairing[nearest[i]] < 0:
            pairing[nearest[i]] = i
    return pairing


def galerkin_spectrum(model, fm: FormMatrix, layout: EnclosureLayout | None = None, dense_limit: int = DENSE_LIMIT, mu=None) -> GalerkinSpectrum:
    """Eigenvalues with left and right eigenvectors of the truncated operator,
    each paired with an index (nearest box centre, or nearest ``mu`` without a layout)."""
    if fm.M > dense_limit:
        raise ParameterError(f"truncation {fm.M} exceeds the dense limit {dense_limit}")
    if mu is None:
        mu = mdl.eigenvalues(model, fm.M)
    mu = np.asarray(mu, dtype=float)[: fm.M]
    res = eig(galerkin_matrix(mu, fm))
    pairing = pair_eigenvalues(res.values, index_centres(mu, layout))
    return GalerkinSpectrum(res.values, res.right, res.left, mu, pairing)


@dataclass
class CorrectionRecord:
    n: int
    mu_n: float
    lambda1: complex
    lambda2: complex
    phi1: list[tuple[int, complex]]
    oracle_lambda: complex
    residual1: float
    residual2: float
    proj_norm: float
    lambda2_tail: float = math.nan

    @property
    def phi1_norm(self) -> float:
        return phi1_norm(self.phi1)


def correction_records(model, fm: FormMatrix, spectrum: GalerkinSpectrum, indices) -> list[CorrectionRecord]:
    mu = spectrum.mu
    out = []
    alpha, Mb = fm.alpha_fit, fm.Mb_fit
    tails_ok = isinstance(model, mdl.ModelSpec) and np.isfinite(alpha) and 2 * alpha + model.gap_gamma > 1
    for n in indices:
        l1 = lambda1(fm, n)
        l2 = lambda2(fm, mu, n)
        ph = phi1(fm, mu, n)
        lam = spectrum.value(n)
        r1 = abs(lam - mu[n - 1] - l1)
        r2 = abs(lam - mu[n - 1] - l1 - l2)
        tail = lambda2_tail(model, alpha, Mb, n, fm.M, float(mu[-1])) if tails_ok else math.nan
        out.append(CorrectionRecord(n, float(mu[n - 1]), l1, l2, ph, lam, r1, r2, spectrum.proj_norm(n), tail))
    return out


CSV_COLUMNS = ("n", "mu", "re_lambda1", "im_lambda1", "re_lambda2", "im_lambda2", "re_oracle", "im_oracle", "residual1", "residual2", "proj_norm")


def record_row(r: CorrectionRecord) -> tuple:
    return (
        r.n, r.mu_n, r.lambda1.real, r.lambda1.imag, r.lambda2.real, r.lambda2.imag,
        r.oracle_lambda.real, r.oracle_lambda.imag, r.residual1, r.residual2, r.proj_norm,
    )


def residual_slope(records: list[CorrectionRecord], alpha: float, gamma: float, floor: float = 1e-12) -> tuple[float, int]:
    """Least-squares slope of ``log residual2`` against ``log remainder_scale(., ., n, 2)``
    over the records whose first correction is above ``floor``; returns (slope, count)."""
    pts = [(r.n, r.residual2) for r in records if abs(r.lambda1) > floor and r.residual2 > 0]
    if len(pts) < 2:
        raise DegenerateError("too few perturbed indices for a slope")
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.log([p[1] for p in pts])
    x = np.log(remainder_scale(alpha, gamma, n, 2))
    slope = np.polyfit(x, y, 1)[0]
    return float(slope), len(pts)

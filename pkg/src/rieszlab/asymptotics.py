"""Checks of the semiclassical laws: eigenvalue and gap asymptotics, the
first-correction law, the two-term eigenvalue expansion and the growth
exponents of L^q norms of eigenfunctions.

Indices here are model indices ``k >= 0`` (``mu_k`` at matrix position ``k + 1``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import models as mdl
from .errors import DomainError, ParameterError
from .perturbations import FunctionalPotential, PerturbationSpec, form_entry
from .quadrature import integrate, panel_nodes
from .reports import parallel_map

FIT_FRACTION = 0.5
INTEGRAL_TOL = 1e-10
LQ_RTOL = 1e-5


@dataclass
class FitReport:
    """Per-index observations against a target with a fitted log-log slope
    on the upper part of the range."""

    index: np.ndarray
    observed: np.ndarray
    target: np.ndarray
    slope: float = math.nan
    target_slope: float = math.nan
    tolerance: float = math.nan

    @property
    def ratio(self) -> np.ndarray:
        return self.observed / self.target

    @property
    def terminal_ratio(self) -> float:
        return float(self.ratio[-1])

    @property
    def drift(self) -> float:
        """Spread of the ratio over the lower (pre-asymptotic) part of the range."""
        r = self.ratio
        lo = r[: max(1, len(r) // 2)]
        return float(np.max(np.abs(lo - r[-1])))

    @property
    def verdict(self) -> bool:
        return bool(abs(self.slope - self.target_slope) <= self.tolerance)

    def rows(self):
        for k, o, t, r in zip(self.index, self.observed, self.target, self.ratio):
            yield (int(k), complex(o).real if np.iscomplexobj(self.observed) else float(o), float(t), float(np.real(r)))

    def summary(self) -> dict:
        return {
            "fitted_slope": self.slope,
            "target_exponent": self.target_slope,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "terminal_ratio": float(np.real(self.terminal_ratio)),
        }


def upper_slice(n: int, fraction: float = FIT_FRACTION) -> slice:
    return slice(int(math.floor((1 - fraction) * n)), n)


def fit_slope(k, y, fraction: float = FIT_FRACTION) -> float:
    k = np.asarray(k, dtype=float)
    y = np.abs(np.asarray(y))
    s = upper_slice(k.size, fraction)
    return float(np.polyfit(np.log(k[s]), np.log(y[s]), 1)[0])


def _gamma(beta: float) -> float:
    return 2.0 if math.isinf(beta) else 2 * beta / (beta + 2)


def exact_or_bs(beta: float, k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if beta == 2:
        return 2 * k + 1
    om, _ = mdl.omega_constants(beta)
    return ((k + 0.5) * math.pi / om) ** _gamma(beta)


def check_mu_and_gaps(beta: float, k_range: Sequence[int]) -> tuple[FitReport, FitReport]:
    """Ratios of ``mu_k`` to ``(pi k / Omega)^gamma`` and of ``mu_{k+1} - mu_k`` to
    ``(2 pi / Omega') (pi k / Omega)^(gamma - 1)``; exact for beta = 2, Bohr-Sommerfeld otherwise."""
    if not beta > 1:
        raise ParameterError("β must exceed 1")
    k = np.asarray(list(k_range), dtype=float)
    if np.any(k < 1):
        raise ParameterError("indices must be positive")
    gamma = _gamma(beta)
    om, omp = mdl.omega_constants(beta)
    mu = exact_or_bs(beta, k)
    base = (math.pi * k / om) ** gamma
    gaps = exact_or_bs(beta, k + 1) - mu
    gap_target = (2 * math.pi / omp) * (math.pi * k / om) ** (gamma - 1)
    return FitReport(k, mu, base), FitReport(k, gaps, gap_target)


def lambda1_target(model: mdl.ModelSpec | float, integral: complex) -> complex:
    """Limit of ``n^(2/(beta+2)) lambda1(n)``, or of ``lambda1(n)`` on the interval."""
    if isinstance(model, mdl.ModelSpec) and isinstance(model.kind, mdl.NeumannInterval):
        return integral / (2 * model.kind.l)
    beta = mdl._beta_of(model) if not (isinstance(model, float) and math.isinf(model)) else math.inf
    om, omp = mdl.omega_constants(beta)
    if math.isinf(beta):
        return integral / omp
    return (1 / omp) * (math.pi / om) ** (-2 / (beta + 2)) * integral


def potential_integral(V: FunctionalPotential, tol: float = INTEGRAL_TOL) -> complex:
    lo, hi = V.support()
    brk = [b for b in V.breakpoints() if lo < b < hi]
    if not (np.isfinite(lo) and np.isfinite(hi)):
        # algebraic tails: truncate and grade the panels geometrically
        lo, hi = -1e6, 1e6
        grade = 10.0 ** np.arange(0, 6)
        brk = sorted(set(brk) | set(grade) | set(-grade) | {0.0})
    re = integrate(lambda x: np.real(V(x)), lo, hi, tol=tol, panels=16, breakpoints=brk)
    im = integrate(lambda x: np.imag(V(x)), lo, hi, tol=tol, panels=16, breakpoints=brk) if not V.is_real else 0.0
    return complex(re, im)


def _scale_power(model: mdl.ModelSpec) -> float:
    if isinstance(model.kind, mdl.NeumannInterval):
        return 0.0
    return 2 / (mdl._beta_of(model) + 2)


def check_lambda1_asym(model: mdl.ModelSpec, V: FunctionalPotential, n_range: Sequence[int]) -> FitReport:
    """``n^(2/(beta+2)) lambda1(n)`` (plain ``lambda1(n)`` on the interval) against the target constant."""
    if not model.has_eigenfunctions:
        raise ParameterError("model has no eigenfunctions")
    n = np.asarray(list(n_range), dtype=int)
    if np.any(n < 1):
        raise ParameterError("indices must be positive")
    power = _scale_power(model)
    target = lambda1_target(model, potential_integral(V))
    pert = PerturbationSpec(V)
    obs = np.array(parallel_map(lambda k: form_entry(model, pert, int(k) + 1, int(k) + 1), list(n))) * n.astype(float) ** power
    return FitReport(n.astype(float), obs, np.full(n.size, target))


def cesaro_means(x) -> np.ndarray:
    x = np.asarray(x)
    return np.cumsum(x) / np.arange(1, x.size + 1)


def two_term_prediction(beta: float, n: int, V_integral: complex) -> complex:
    """``(pi (n + 1/2) / Omega)^gamma + (1/Omega') (pi n / Omega)^(-2/(beta+2)) int V``."""
    if not beta >= 2:
        raise ParameterError("two-term prediction needs β >= 2")
    om, omp = mdl.omega_constants(beta)
    lead = (math.pi * (n + 0.5) / om) ** _gamma(beta)
    if n == 0:
        return complex(lead) if V_integral == 0 else complex(math.nan, math.nan)
    return lead + (1 / omp) * (math.pi * n / om) ** (-2 / (beta + 2)) * V_integral


def two_term_errors(V: FunctionalPotential, n_range: Sequence[int], M: int | None = None) -> FitReport:
    """Harmonic oscillator plus ``V``: Galerkin eigenvalues against the two-term
    prediction; the fitted slope is that of ``log |error|``."""
    from .corrections import galerkin_spectrum
    from .perturbations import form_matrix

    n = np.asarray(list(n_range), dtype=int)
    model = mdl.harmonic_model()
    if M is None:
        M = int(2 * n.max() + 2)
    fm = form_matrix(model, PerturbationSpec(V), M, fit=False)
    sp = galerkin_spectrum(model, fm)
    integral = potential_integral(V)
    pred = np.array([two_term_prediction(2.0, int(k), integral) for k in n])
    orc = np.array([sp.value(int(k) + 1) for k in n])
    err = np.abs(orc - pred)
    rep = FitReport(n.astype(float), err, np.abs(pred))
    rep.slope = fit_slope(n, err)
    rep.target_slope = -2 / (2.0 + 2)
    return rep


def lq_exponent(beta: float, q: float, tau: float = 0.0) -> float:
    """Growth exponent of ``||w psi_k||_q`` with ``w = (1 + x^2)^(tau/2)``."""
    weight = 2 * tau / (beta + 2)
    if q < 1:
        raise ParameterError("q must be at least 1")
    if math.isinf(q):
        base = (beta - 4) / (6 * (beta + 2))
    elif q < 4:
        base = (2 - q) / (q * (beta + 2))
    elif q == 4:
        base = -1 / (2 * (beta + 2))
    else:
        base = (4 - 4 * beta - 4 * q + q * beta) / (6 * q * (beta + 2))
    return base + weight


def _psi_callable(beta: float, k: int):
    if beta == 2:
        return lambda x: mdl.hermite_psi(k, x)
    return lambda x: mdl.eigenfunction(mdl.SingleWell(beta), k, x)


def weighted_lq_norm(beta: float, k: int, q: float, tau: float = 0.0, order: int = 20) -> float:
    """``||w psi_k||_q`` on panels no wider than a quarter of the local
    oscillation period, over the window where ``psi_k`` exceeds 1e-14."""
    model = mdl.harmonic_model() if beta == 2 else mdl.single_well_model(beta)
    _, hi = mdl.envelope_window(model, k + 1)
    psi = _psi_callable(beta, k)
    w = lambda x: (1 + x * x) ** (tau / 2)
    mu = float(exact_or_bs(beta, np.array([k]))[0])
    width = 0.25 * 2 * math.pi / math.sqrt(mu) if mu > 0 else 0.5
    count = max(8, int(math.ceil(hi / width)))
    breaks = np.linspace(0.0, hi, count + 1)
    x, wq = panel_nodes(breaks, order)
    vals = np.abs(w(x) * psi(x))
    if not np.all(np.isfinite(vals)):
        raise DomainError("eigenfunction evaluation produced non-finite values")
    if math.isinf(q):
        i = int(np.argmax(vals))
        lo_, hi_ = (x[i - 1] if i > 0 else 0.0), x[min(i + 1, x.size - 1)]
        res = minimize_scalar(lambda t: -abs(float(w(t) * psi(np.array([t]))[0])), bounds=(lo_, hi_), method="bounded", options={"xatol": 1e-12})
        return float(max(vals[i], -res.fun))
    # even integrand: twice the half line; |psi|^q has kinks at zeros for
    # small q, so convergence is algebraic and panels are doubled
    total = 2 * float(np.sum(wq * vals**q))
    for _ in range(6):
        breaks = np.linspace(0.0, hi, 2 * (breaks.size - 1) + 1)
        x, wq = panel_nodes(breaks, order)
        cur = 2 * float(np.sum(wq * np.abs(w(x) * psi(x)) ** q))
        if abs(cur - total) <= LQ_RTOL * cur:
            return cur ** (1 / q)
        total = cur
    raise DomainError(f"grid does not resolve the oscillation at k={k}")


def check_Lq_norms(beta: float, q: float, tau: float, k_range: Sequence[int], tolerance: float = 0.03) -> FitReport:
    """Fitted growth exponent of ``||w psi_k||_q`` on the upper half of ``k_range``;
    at ``q = 4`` the ``(log k)^(1/4)`` factor is divided out first."""
    if not beta > 1:
        raise ParameterError("β must exceed 1")
    k = np.asarray(list(k_range), dtype=int)
    if np.any(k < 1):
        raise ParameterError("indices must be positive")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", mdl.LowIndexWarning)
        obs = np.array(parallel_map(lambda j: weighted_lq_norm(beta, int(j), q, tau), list(k)))
    kf = k.astype(float)
    expo = lq_exponent(beta, q, tau)
    fitted = obs / np.log(kf) ** 0.25 if q == 4 else obs
    rep = FitReport(kf, obs, kf**expo, fit_slope(kf, fitted), expo, tolerance)
    return rep
